#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "biip/dynamics.hpp"
#include "biip/graph.hpp"

namespace biip {

enum class Activation { softplus, identity };
enum class Aggregation { mean, maxpool };

std::string to_string(Activation a);
std::string to_string(Aggregation a);
Activation activation_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

double softplus(double x);

// One message-passing layer x' = act(A x_u + B agg_u + bias).
struct MPLayerParams {
  Eigen::MatrixXd self_weight;      // A, out x in
  Eigen::MatrixXd neighbor_weight;  // B, out x in
  Eigen::VectorXd bias;             // out
  Activation activation = Activation::softplus;

  int in_dim() const { return static_cast<int>(self_weight.cols()); }
  int out_dim() const { return static_cast<int>(self_weight.rows()); }
};

// Stack of message-passing layers acting on scalar fields over the sites of
// a clique level: in and out dims are 1, hidden layers share hidden_dim,
// activations are softplus with an identity last layer.
struct ModelParams {
  int level = 0;
  BoundaryKind message_kind = BoundaryKind::dirichlet;
  Aggregation aggregation = Aggregation::mean;
  std::vector<MPLayerParams> layers;

  void validate() const;
  int param_count() const;
  // Flat layout: per layer, A row-major, then B row-major, then bias.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& theta);
};

// Fresh model with every parameter uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
ModelParams init_model(int num_layers, int hidden_dim, BoundaryKind kind, Aggregation agg,
                       int level, std::uint64_t seed);

// Pairwise message from v into u: dirichlet passes the source encoding,
// neumann the difference along the edge.
Eigen::VectorXd message(BoundaryKind kind, const Eigen::VectorXd& x_u,
                        const Eigen::VectorXd& x_v);

// True boundary values at layer depth 0; for a dirichlet model one value per
// boundary site, for a neumann model one outward flux per half edge, both in
// dataset column order.
struct BoundarySnapshot {
  Eigen::VectorXd values;
};

// Linear interpolation of the boundary observations between bracketing
// knots; exact (no arithmetic) at the knots themselves. Out-of-range times
// throw unless clamp holds the end values.
BoundarySnapshot interpolate_boundary(const BVPDataset& d, double t, bool clamp = false);

// Message-passing support structure for one graph and clique level: sites
// are the level-k cliques, neighbors share a (k-1)-face (graph adjacency at
// level 0), and a site is boundary when any of its nodes is. Levels 0 and 1
// are supported.
class MessageGraph {
 public:
  MessageGraph(const GraphWithBoundary& g, int level);

  int level() const { return level_; }
  int site_count() const { return static_cast<int>(sites_.size()); }
  int interior_count() const { return static_cast<int>(interior_sites_.size()); }
  int boundary_count() const { return static_cast<int>(boundary_sites_.size()); }
  const std::vector<std::vector<int>>& sites() const { return sites_; }
  const std::vector<int>& interior_sites() const { return interior_sites_; }
  const std::vector<int>& boundary_sites() const { return boundary_sites_; }
  int half_edge_count() const { return n_half_edges_; }

  // Neighbor-sum operators: column u holds 1 at each active neighbor of u.
  // The interior operator pairs interior sites only; the full operator pairs
  // every site (the vanilla model's graph).
  const Eigen::SparseMatrix<double>& interior_adjacency() const { return n_int_; }
  const Eigen::SparseMatrix<double>& full_adjacency() const { return n_full_; }

  // Per interior site: boundary observation slots feeding its teacher-forced
  // messages, as a sparse sum operator (slots x interior); dirichlet slots
  // index boundary sites, neumann slots index half edges.
  const Eigen::SparseMatrix<double>& boundary_slots(BoundaryKind kind) const;

  // Message counts per active site (interior neighbors plus boundary slots
  // for the teacher-forced interior mode; plain degree for the full mode).
  const Eigen::VectorXd& interior_message_count(BoundaryKind kind) const;
  const Eigen::VectorXd& full_message_count() const { return count_full_; }
  // Of which, interior-interior neighbor counts (needed by neumann messages).
  const Eigen::VectorXd& interior_neighbor_count() const { return nbr_count_int_; }

  // Explicit neighbor lists, used by the maxpool path and by tests.
  const std::vector<std::vector<int>>& interior_neighbors() const { return int_nbrs_; }
  const std::vector<std::vector<int>>& full_neighbors() const { return full_nbrs_; }
  const std::vector<std::vector<int>>& boundary_slot_lists(BoundaryKind kind) const;

 private:
  int level_;
  std::vector<std::vector<int>> sites_;
  std::vector<int> interior_sites_;  // ascending site ids
  std::vector<int> boundary_sites_;
  std::vector<std::vector<int>> int_nbrs_;    // dense interior index -> dense neighbors
  std::vector<std::vector<int>> full_nbrs_;   // site id -> neighbor site ids
  std::vector<std::vector<int>> dirichlet_slots_;  // dense interior -> boundary positions
  std::vector<std::vector<int>> neumann_slots_;    // dense interior -> half-edge positions
  int n_half_edges_ = 0;
  Eigen::SparseMatrix<double> n_int_, n_full_, p_dirichlet_, p_neumann_;
  Eigen::VectorXd count_int_dirichlet_, count_int_neumann_, count_full_, nbr_count_int_;
};

// One layer over the interior sites without boundary contributions;
// encodings are stacked per column. The building block of the full forwards,
// exposed for direct testing.
Eigen::MatrixXd layer_forward(const MPLayerParams& p, const Eigen::MatrixXd& encodings,
                              const MessageGraph& mg, Aggregation agg,
                              BoundaryKind kind = BoundaryKind::dirichlet);

// Learned operator over the interior: every layer aggregates messages from
// interior neighbors at the current depth together with depth-0 messages
// from true boundary values (scalars, broadcast across message channels at
// hidden depths). Returns one value per interior site.
Eigen::VectorXd forward_teacher_forced(const ModelParams& m,
                                       const Eigen::VectorXd& interior_field,
                                       const BoundarySnapshot& boundary,
                                       const MessageGraph& mg);

// Ablation: the same stack over the whole graph with boundary sites treated
// as ordinary sites and no injected data.
Eigen::VectorXd forward_vanilla(const ModelParams& m, const Eigen::VectorXd& full_field,
                                const MessageGraph& mg);

// Recorded forward pass (inputs, aggregates, pre-activations, maxpool
// winners) with its reverse sweep; shared by both model variants.
struct MpTrace {
  struct Layer {
    Eigen::MatrixXd x, m, z;
    Eigen::MatrixXi argmax;  // maxpool winners, -1 on empty neighborhoods
  };
  std::vector<Layer> layers;
  Eigen::MatrixXd out;
};

MpTrace forward_traced(const ModelParams& m, const Eigen::MatrixXd& x0,
                       const BoundarySnapshot* boundary, const MessageGraph& mg,
                       bool teacher_forced);

// Pulls out_cotangent back through a recorded forward: fills x0_cotangent
// (overwritten) and adds the parameter gradient into param_grad (layout as
// ModelParams::flatten).
void backward_traced(const ModelParams& m, const MpTrace& trace,
                     const Eigen::MatrixXd& out_cotangent, const MessageGraph& mg,
                     bool teacher_forced, Eigen::MatrixXd& x0_cotangent,
                     Eigen::VectorXd& param_grad);

}  // namespace biip
