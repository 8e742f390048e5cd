#include "biip/mpnn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "biip/errors.hpp"
#include "biip/rng.hpp"

namespace biip {

std::string to_string(Activation a) {
  return a == Activation::softplus ? "softplus" : "identity";
}

std::string to_string(Aggregation a) { return a == Aggregation::mean ? "mean" : "maxpool"; }

Activation activation_from_string(const std::string& s) {
  if (s == "softplus") return Activation::softplus;
  if (s == "identity") return Activation::identity;
  throw SpecError("unknown activation: " + s);
}

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "maxpool") return Aggregation::maxpool;
  throw SpecError("unknown aggregation: " + s);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::MatrixXd apply_activation(Activation a, const Eigen::MatrixXd& z) {
  if (a == Activation::identity) return z;
  return z.unaryExpr([](double v) { return softplus(v); });
}

Eigen::MatrixXd activation_slope(Activation a, const Eigen::MatrixXd& z) {
  if (a == Activation::identity) return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::SparseMatrix<double> lists_to_sparse(int rows, const std::vector<std::vector<int>>& cols) {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (int r : cols[c]) trips.emplace_back(r, static_cast<int>(c), 1.0);
  Eigen::SparseMatrix<double> m(rows, static_cast<int>(cols.size()));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

void ModelParams::validate() const {
  if (layers.empty()) throw SpecError("model needs at least one layer");
  if (layers.front().in_dim() != 1 || layers.back().out_dim() != 1)
    throw SpecError("model must map scalar site values to scalar site values");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.neighbor_weight.rows() != l.out_dim() || l.neighbor_weight.cols() != l.in_dim() ||
        l.bias.size() != l.out_dim())
      throw SpecError("layer " + std::to_string(i) + ": inconsistent parameter shapes");
    if (i + 1 < layers.size() && layers[i + 1].in_dim() != l.out_dim())
      throw SpecError("layer " + std::to_string(i) + ": output dim does not feed next layer");
  }
  if (layers.back().activation != Activation::identity)
    throw SpecError("last layer must use the identity activation");
  if (level != 0 && level != 1) throw SpecError("model level must be 0 or 1");
  if (level == 1 && message_kind == BoundaryKind::neumann)
    throw SpecError("vector-field models support dirichlet messages only");
}

int ModelParams::param_count() const {
  int n = 0;
  for (const auto& l : layers)
    n += 2 * l.out_dim() * l.in_dim() + l.out_dim();
  return n;
}

Eigen::VectorXd ModelParams::flatten() const {
  Eigen::VectorXd theta(param_count());
  int at = 0;
  for (const auto& l : layers) {
    for (int r = 0; r < l.out_dim(); ++r)
      for (int c = 0; c < l.in_dim(); ++c) theta(at++) = l.self_weight(r, c);
    for (int r = 0; r < l.out_dim(); ++r)
      for (int c = 0; c < l.in_dim(); ++c) theta(at++) = l.neighbor_weight(r, c);
    for (int r = 0; r < l.out_dim(); ++r) theta(at++) = l.bias(r);
  }
  return theta;
}

void ModelParams::unflatten(const Eigen::VectorXd& theta) {
  if (theta.size() != param_count())
    throw SpecError("unflatten: expected " + std::to_string(param_count()) + " parameters, got " +
                    std::to_string(theta.size()));
  int at = 0;
  for (auto& l : layers) {
    for (int r = 0; r < l.out_dim(); ++r)
      for (int c = 0; c < l.in_dim(); ++c) l.self_weight(r, c) = theta(at++);
    for (int r = 0; r < l.out_dim(); ++r)
      for (int c = 0; c < l.in_dim(); ++c) l.neighbor_weight(r, c) = theta(at++);
    for (int r = 0; r < l.out_dim(); ++r) l.bias(r) = theta(at++);
  }
}

ModelParams init_model(int num_layers, int hidden_dim, BoundaryKind kind, Aggregation agg,
                       int level, std::uint64_t seed) {
  if (num_layers < 1) throw SpecError("init_model: need at least one layer");
  if (hidden_dim < 1) throw SpecError("init_model: hidden_dim must be >= 1");

  ModelParams m;
  m.level = level;
  m.message_kind = kind;
  m.aggregation = agg;
  Rng rng(seed);
  for (int i = 0; i < num_layers; ++i) {
    const int in = i == 0 ? 1 : hidden_dim;
    const int out = i == num_layers - 1 ? 1 : hidden_dim;
    MPLayerParams l;
    l.self_weight.resize(out, in);
    l.neighbor_weight.resize(out, in);
    l.bias.resize(out);
    l.activation = i == num_layers - 1 ? Activation::identity : Activation::softplus;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.self_weight(r, c) = rng.uniform(-bound, bound);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) l.neighbor_weight(r, c) = rng.uniform(-bound, bound);
    for (int r = 0; r < out; ++r) l.bias(r) = rng.uniform(-bound, bound);
    m.layers.push_back(std::move(l));
  }
  m.validate();
  return m;
}

Eigen::VectorXd message(BoundaryKind kind, const Eigen::VectorXd& x_u,
                        const Eigen::VectorXd& x_v) {
  if (x_u.size() != x_v.size()) throw SpecError("message: encoding dims differ");
  return kind == BoundaryKind::dirichlet ? x_v : (x_v - x_u).eval();
}

BoundarySnapshot interpolate_boundary(const BVPDataset& d, double t, bool clamp) {
  const auto& ts = d.timestamps;
  if (ts.empty()) throw SpecError("interpolate_boundary: dataset has no timestamps");
  if (t < ts.front() || t > ts.back()) {
    if (!clamp)
      throw SpecError("interpolate_boundary: t = " + std::to_string(t) +
                      " outside observed range");
    return BoundarySnapshot{
        d.boundary_obs.row(t < ts.front() ? 0 : d.knot_count() - 1).transpose()};
  }
  // upper_bound - 1 gives the left knot; knots themselves are returned
  // without arithmetic so replaying observed times is exact.
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const int hi = std::min<int>(static_cast<int>(it - ts.begin()), d.knot_count() - 1);
  const int lo = hi - (hi > 0 ? 1 : 0);
  if (t == ts[lo]) return BoundarySnapshot{d.boundary_obs.row(lo).transpose()};
  if (t == ts[hi]) return BoundarySnapshot{d.boundary_obs.row(hi).transpose()};
  const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return BoundarySnapshot{((1.0 - w) * d.boundary_obs.row(lo) + w * d.boundary_obs.row(hi))
                              .transpose()};
}

MessageGraph::MessageGraph(const GraphWithBoundary& g, int level) : level_(level) {
  if (level != 0 && level != 1)
    throw SpecError("message passing supports clique levels 0 and 1");
  sites_ = enumerate_cliques(g, level);
  const int n = static_cast<int>(sites_.size());

  std::vector<bool> is_boundary_site(n, false);
  for (int s = 0; s < n; ++s)
    for (int v : sites_[s])
      if (g.is_boundary(v)) is_boundary_site[s] = true;

  std::vector<int> interior_dense(n, -1), boundary_dense(n, -1);
  for (int s = 0; s < n; ++s) {
    if (is_boundary_site[s]) {
      boundary_dense[s] = static_cast<int>(boundary_sites_.size());
      boundary_sites_.push_back(s);
    } else {
      interior_dense[s] = static_cast<int>(interior_sites_.size());
      interior_sites_.push_back(s);
    }
  }

  // Site adjacency: the graph itself at level 0; shared-node incidence
  // between edges at level 1.
  full_nbrs_.assign(n, {});
  if (level == 0) {
    for (const auto& [u, v] : g.edges) {
      full_nbrs_[u].push_back(v);
      full_nbrs_[v].push_back(u);
    }
  } else {
    std::vector<std::vector<int>> incident(g.node_count);
    for (int s = 0; s < n; ++s)
      for (int v : sites_[s]) incident[v].push_back(s);
    for (const auto& around : incident)
      for (std::size_t i = 0; i < around.size(); ++i)
        for (std::size_t j = i + 1; j < around.size(); ++j) {
          full_nbrs_[around[i]].push_back(around[j]);
          full_nbrs_[around[j]].push_back(around[i]);
        }
  }
  for (auto& nbrs : full_nbrs_) std::sort(nbrs.begin(), nbrs.end());

  // Half-edge slot lookup (level 0, neumann messages).
  std::map<std::pair<int, int>, int> half_edge_index;
  for (std::size_t i = 0; i < g.half_edges.size(); ++i)
    half_edge_index[g.half_edges[i]] = static_cast<int>(i);
  n_half_edges_ = static_cast<int>(g.half_edges.size());

  const int ni = interior_count();
  int_nbrs_.assign(ni, {});
  dirichlet_slots_.assign(ni, {});
  neumann_slots_.assign(ni, {});
  for (int a = 0; a < ni; ++a) {
    const int s = interior_sites_[a];
    for (int t : full_nbrs_[s]) {
      if (!is_boundary_site[t]) {
        int_nbrs_[a].push_back(interior_dense[t]);
        continue;
      }
      dirichlet_slots_[a].push_back(boundary_dense[t]);
      if (level == 0) {
        const auto it = half_edge_index.find({s, sites_[t][0]});
        if (it == half_edge_index.end())
          throw SpecError("half edge missing from graph decomposition");
        neumann_slots_[a].push_back(it->second);
      }
    }
  }

  n_int_ = lists_to_sparse(ni, int_nbrs_);
  std::vector<std::vector<int>> full_cols(full_nbrs_.begin(), full_nbrs_.end());
  n_full_ = lists_to_sparse(n, full_cols);
  p_dirichlet_ = lists_to_sparse(boundary_count(), dirichlet_slots_);
  p_neumann_ = lists_to_sparse(n_half_edges_, neumann_slots_);

  nbr_count_int_.resize(ni);
  count_int_dirichlet_.resize(ni);
  count_int_neumann_.resize(ni);
  for (int a = 0; a < ni; ++a) {
    nbr_count_int_(a) = static_cast<double>(int_nbrs_[a].size());
    count_int_dirichlet_(a) = nbr_count_int_(a) + static_cast<double>(dirichlet_slots_[a].size());
    count_int_neumann_(a) = nbr_count_int_(a) + static_cast<double>(neumann_slots_[a].size());
  }
  count_full_.resize(n);
  for (int s = 0; s < n; ++s) count_full_(s) = static_cast<double>(full_nbrs_[s].size());
}

const Eigen::SparseMatrix<double>& MessageGraph::boundary_slots(BoundaryKind kind) const {
  if (kind == BoundaryKind::neumann && level_ != 0)
    throw SpecError("neumann slots exist for node fields only");
  return kind == BoundaryKind::dirichlet ? p_dirichlet_ : p_neumann_;
}

const Eigen::VectorXd& MessageGraph::interior_message_count(BoundaryKind kind) const {
  return kind == BoundaryKind::dirichlet ? count_int_dirichlet_ : count_int_neumann_;
}

const std::vector<std::vector<int>>& MessageGraph::boundary_slot_lists(BoundaryKind kind) const {
  if (kind == BoundaryKind::neumann && level_ != 0)
    throw SpecError("neumann slots exist for node fields only");
  return kind == BoundaryKind::dirichlet ? dirichlet_slots_ : neumann_slots_;
}

namespace {

// Aggregated message matrix for one layer. X holds the active-site encodings
// (interior sites in teacher-forced mode, all sites otherwise); boundary
// slot values, when present, enter as scalars broadcast across channels.
// For maxpool the per-entry winning candidate index is written to argmax
// (interior neighbors first, then boundary slots; -1 = empty neighborhood).
Eigen::MatrixXd aggregate_messages(const ModelParams& m, const Eigen::MatrixXd& x,
                                   const BoundarySnapshot* boundary, const MessageGraph& mg,
                                   bool teacher_forced, Eigen::MatrixXi* argmax) {
  const BoundaryKind kind = m.message_kind;
  const int d = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());

  if (m.aggregation == Aggregation::mean) {
    Eigen::MatrixXd s;
    Eigen::VectorXd count;
    if (teacher_forced) {
      s = x * mg.interior_adjacency();
      if (kind == BoundaryKind::neumann)
        s -= x * mg.interior_neighbor_count().asDiagonal();
      if (boundary && boundary->values.size() > 0) {
        const Eigen::VectorXd bsum = mg.boundary_slots(kind).transpose() * boundary->values;
        s.rowwise() += bsum.transpose();
      }
      // Without a snapshot only interior messages exist, so only they count.
      count = boundary ? mg.interior_message_count(kind) : mg.interior_neighbor_count();
    } else {
      s = x * mg.full_adjacency();
      if (kind == BoundaryKind::neumann) s -= x * mg.full_message_count().asDiagonal();
      count = mg.full_message_count();
    }
    const Eigen::VectorXd inv =
        count.unaryExpr([](double c) { return c > 0.0 ? 1.0 / c : 0.0; });
    return s * inv.asDiagonal();
  }

  // maxpool: entrywise max over the candidate list, winners recorded.
  const auto& nbrs = teacher_forced ? mg.interior_neighbors() : mg.full_neighbors();
  const std::vector<std::vector<int>>* slots =
      teacher_forced ? &mg.boundary_slot_lists(kind) : nullptr;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, n);
  if (argmax) *argmax = Eigen::MatrixXi::Constant(d, n, -1);
  for (int a = 0; a < n; ++a) {
    int cand = 0;
    for (int b : nbrs[a]) {
      for (int c = 0; c < d; ++c) {
        const double v = kind == BoundaryKind::dirichlet ? x(c, b) : x(c, b) - x(c, a);
        if (cand == 0 || v > out(c, a)) {
          out(c, a) = v;
          if (argmax) (*argmax)(c, a) = cand;
        }
      }
      ++cand;
    }
    if (slots && boundary) {
      for (int slot : (*slots)[a]) {
        const double v = boundary->values(slot);
        for (int c = 0; c < d; ++c) {
          if (cand == 0 || v > out(c, a)) {
            out(c, a) = v;
            if (argmax) (*argmax)(c, a) = cand;
          }
        }
        ++cand;
      }
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd layer_forward(const MPLayerParams& p, const Eigen::MatrixXd& encodings,
                              const MessageGraph& mg, Aggregation agg, BoundaryKind kind) {
  if (encodings.rows() != p.in_dim())
    throw SpecError("layer_forward: encoding dim does not match layer input dim");
  if (encodings.cols() != mg.interior_count())
    throw SpecError("layer_forward: one encoding column per interior site required");
  ModelParams shim;
  shim.message_kind = kind;
  shim.aggregation = agg;
  const Eigen::MatrixXd msg = aggregate_messages(shim, encodings, nullptr, mg, true, nullptr);
  const Eigen::MatrixXd z =
      ((p.self_weight * encodings + p.neighbor_weight * msg).colwise() + p.bias).eval();
  return apply_activation(p.activation, z);
}

MpTrace forward_traced(const ModelParams& m, const Eigen::MatrixXd& x0,
                       const BoundarySnapshot* boundary, const MessageGraph& mg,
                       bool teacher_forced) {
  m.validate();
  const int n = teacher_forced ? mg.interior_count() : mg.site_count();
  if (x0.rows() != 1 || x0.cols() != n)
    throw SpecError("forward: expected a 1 x " + std::to_string(n) + " site-value matrix");
  if (teacher_forced) {
    if (!boundary) throw SpecError("forward: teacher forcing requires a boundary snapshot");
    const int want = m.message_kind == BoundaryKind::dirichlet ? mg.boundary_count()
                                                               : mg.half_edge_count();
    if (boundary->values.size() != want)
      throw SpecError("forward: boundary snapshot has " +
                      std::to_string(boundary->values.size()) + " values, expected " +
                      std::to_string(want));
  }

  MpTrace trace;
  trace.layers.resize(m.layers.size());
  Eigen::MatrixXd x = x0;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const MPLayerParams& l = m.layers[i];
    MpTrace::Layer& rec = trace.layers[i];
    rec.x = x;
    const bool track_argmax = m.aggregation == Aggregation::maxpool;
    rec.m = aggregate_messages(m, x, teacher_forced ? boundary : nullptr, mg, teacher_forced,
                               track_argmax ? &rec.argmax : nullptr);
    rec.z = ((l.self_weight * x + l.neighbor_weight * rec.m).colwise() + l.bias).eval();
    x = apply_activation(l.activation, rec.z);
  }
  trace.out = x;
  return trace;
}

void backward_traced(const ModelParams& m, const MpTrace& trace,
                     const Eigen::MatrixXd& out_cotangent, const MessageGraph& mg,
                     bool teacher_forced, Eigen::MatrixXd& x0_cotangent,
                     Eigen::VectorXd& param_grad) {
  if (param_grad.size() != m.param_count())
    throw SpecError("backward: parameter gradient buffer size mismatch");
  const BoundaryKind kind = m.message_kind;

  Eigen::MatrixXd g = out_cotangent;
  // Parameter gradients are collected per layer and folded into the flat
  // layout afterwards so the offsets are written once.
  std::vector<Eigen::MatrixXd> grad_a(m.layers.size()), grad_b(m.layers.size());
  std::vector<Eigen::VectorXd> grad_bias(m.layers.size());

  for (int i = static_cast<int>(m.layers.size()) - 1; i >= 0; --i) {
    const MPLayerParams& l = m.layers[i];
    const MpTrace::Layer& rec = trace.layers[i];
    const Eigen::MatrixXd gz = g.cwiseProduct(activation_slope(l.activation, rec.z));

    grad_a[i] = gz * rec.x.transpose();
    grad_b[i] = gz * rec.m.transpose();
    grad_bias[i] = gz.rowwise().sum();

    Eigen::MatrixXd gx = l.self_weight.transpose() * gz;
    const Eigen::MatrixXd gm = l.neighbor_weight.transpose() * gz;

    if (m.aggregation == Aggregation::mean) {
      const Eigen::VectorXd& count = teacher_forced ? mg.interior_message_count(kind)
                                                    : mg.full_message_count();
      const Eigen::VectorXd inv =
          count.unaryExpr([](double c) { return c > 0.0 ? 1.0 / c : 0.0; });
      const Eigen::MatrixXd gms = gm * inv.asDiagonal();
      // Adjacency operators are symmetric, so the scatter reuses them as-is.
      gx += gms * (teacher_forced ? mg.interior_adjacency() : mg.full_adjacency());
      if (kind == BoundaryKind::neumann) {
        if (teacher_forced)
          gx -= gms * mg.interior_neighbor_count().asDiagonal();
        else
          gx -= gms * mg.full_message_count().asDiagonal();
      }
    } else {
      const auto& nbrs = teacher_forced ? mg.interior_neighbors() : mg.full_neighbors();
      for (int a = 0; a < gm.cols(); ++a) {
        const int deg = static_cast<int>(nbrs[a].size());
        for (int c = 0; c < gm.rows(); ++c) {
          const int win = rec.argmax(c, a);
          if (win < 0 || win >= deg) continue;  // empty or boundary winner
          const int b = nbrs[a][win];
          gx(c, b) += gm(c, a);
          if (kind == BoundaryKind::neumann) gx(c, a) -= gm(c, a);
        }
      }
    }
    g = std::move(gx);
  }
  x0_cotangent = std::move(g);

  int at = 0;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const int out = m.layers[i].out_dim(), in = m.layers[i].in_dim();
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) param_grad(at++) += grad_a[i](r, c);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) param_grad(at++) += grad_b[i](r, c);
    for (int r = 0; r < out; ++r) param_grad(at++) += grad_bias[i](r);
  }
}

Eigen::VectorXd forward_teacher_forced(const ModelParams& m,
                                       const Eigen::VectorXd& interior_field,
                                       const BoundarySnapshot& boundary,
                                       const MessageGraph& mg) {
  const MpTrace trace =
      forward_traced(m, interior_field.transpose(), &boundary, mg, true);
  return trace.out.row(0).transpose();
}

Eigen::VectorXd forward_vanilla(const ModelParams& m, const Eigen::VectorXd& full_field,
                                const MessageGraph& mg) {
  const MpTrace trace = forward_traced(m, full_field.transpose(), nullptr, mg, false);
  return trace.out.row(0).transpose();
}

}  // namespace biip
