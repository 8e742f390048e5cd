#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "biip/dynamics.hpp"
#include "biip/mpnn.hpp"
#include "biip/odeint.hpp"
#include "biip/rng.hpp"

namespace biip {

// Bias-corrected Adam.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;

  explicit AdamState(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

// One in-place update. A non-finite gradient skips the step (returns false)
// so a single bad segment cannot poison the moment estimates.
bool adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               const AdamConfig& cfg);

// Which right-hand side a checkpoint describes: the boundary-forced model,
// its whole-graph ablation, or the generating linear operator itself (an
// analytic reference used as a test fixture).
enum class OperatorVariant { teacher_forced, vanilla, oracle_linear };

std::string to_string(OperatorVariant v);
OperatorVariant operator_variant_from_string(const std::string& s);

struct LearnedOperator {
  OperatorVariant variant = OperatorVariant::teacher_forced;
  ModelParams model;          // unused for oracle_linear
  double oracle_alpha = 1.0;  // oracle_linear only
};

// dy/dt over the interior sites: the model applied to the current interior
// state with boundary messages interpolated from the dataset at the query
// time (clamped at the ends so roundoff past the last knot stays defined).
class TeacherForcedField : public DifferentiableField {
 public:
  TeacherForcedField(const ModelParams& m, const BVPDataset& d, const MessageGraph& mg);

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& y) const override;
  int param_count() const override { return model_.param_count(); }
  void vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
           Eigen::VectorXd& y_cotangent, Eigen::VectorXd& param_grad) const override;

 private:
  const ModelParams& model_;
  const BVPDataset& data_;
  const MessageGraph& mg_;
};

// dy/dt over all sites; boundary sites evolve like any other (the ablation
// baseline). Autonomous: the observed boundary series is never consulted.
class VanillaField : public DifferentiableField {
 public:
  VanillaField(const ModelParams& m, const MessageGraph& mg);

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& y) const override;
  int param_count() const override { return model_.param_count(); }
  void vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
           Eigen::VectorXd& y_cotangent, Eigen::VectorXd& param_grad) const override;

 private:
  const ModelParams& model_;
  const MessageGraph& mg_;
};

// The generating heat flow restricted to the interior coordinates and driven
// by the interpolated boundary observations:
//   y' = -alpha (L_ii y + L_ib beta(t))
// with L the Hodge Laplacian of the dataset's own graph partitioned along
// the dataset's interior/boundary column order. For flux data the boundary
// block feeds the observed fluxes in directly.
class OracleLinearField : public VectorField {
 public:
  OracleLinearField(const BVPDataset& d, double alpha);

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& y) const override;

 private:
  const BVPDataset& data_;
  double alpha_;
  Eigen::SparseMatrix<double> l_ii_;  // interior x interior
  Eigen::SparseMatrix<double> l_ib_;  // interior x boundary columns
};

// Field for a checkpointed operator on a dataset. The returned field keeps
// references to op, d, and mg; all three must outlive it. Rejects the
// whole-graph ablation on flux datasets (no boundary values to start from).
std::unique_ptr<VectorField> make_field(const LearnedOperator& op, const BVPDataset& d,
                                        const MessageGraph& mg);

// Full-graph state at a knot, one entry per site in site order; requires
// value (dirichlet) boundary data.
Eigen::VectorXd full_state_at(const BVPDataset& d, const MessageGraph& mg, int knot);

struct TrainConfig {
  int epochs = 500;
  int segment_length = 4;  // knots per training segment
  AdamConfig adam;
  std::uint64_t seed = 0;
  // Training integrates knot to knot; fixed_step <= 0 picks span/8 per
  // interval. Gradients require the classical fixed-step scheme.
  SolverConfig solver{SolverMethod::rk4_fixed, 0.0, 1e-6, 1e-8, 100000};

  void validate(const BVPDataset& d) const;
};

// One record per epoch; mirrors the run log line for line.
struct EpochLog {
  int epoch = 0;
  double train_mse = std::numeric_limits<double>::quiet_NaN();  // NaN: segment diverged
  double val_rmse = std::numeric_limits<double>::quiet_NaN();   // NaN: no held-out set
  double wall_ms = 0.0;
  bool skipped = false;  // rollout diverged; parameters untouched
};

struct TrainResult {
  LearnedOperator op;
  std::vector<EpochLog> log;
  int diverged_segments = 0;  // rollouts that blew up (step skipped)
  int skipped_updates = 0;    // non-finite gradients caught by adam_step
};

// Uniform segment start i in [0, T-1-m]; returns (i, i+m).
std::pair<int, int> sample_segment(const BVPDataset& d, int m, Rng& rng);

// Endpoint loss of one teacher-forced segment rollout: integrate the
// observed interior state from knot seg.first to knot seg.second and take
// the mean squared error against the observed endpoint, interior sites only.
double segment_loss(const ModelParams& model, const BVPDataset& d, std::pair<int, int> seg,
                    const SolverConfig& solver);

// Same endpoint loss, plus its gradient through the taped rollout -- the exact
// quantity the optimiser consumes, exposed so the reverse pass can be checked
// against finite differences of segment_loss.
double segment_loss_with_gradient(const LearnedOperator& op, const BVPDataset& d,
                                  std::pair<int, int> seg, const SolverConfig& solver,
                                  Eigen::VectorXd& grad);

// Segment-sampling training loop: every epoch draws one segment, rolls it
// out, and applies one Adam update from the endpoint loss (interior mean
// squared error; the ablation fits the whole graph). A diverging rollout
// skips the epoch; a finite rollout with a non-finite loss aborts
// (NumericError). When val is given, each record carries the rollout RMSE
// over the held-out window.
TrainResult train(const LearnedOperator& init, const BVPDataset& d, const BVPDataset* val,
                  const TrainConfig& cfg);

// Predictions across d's knot grid starting from the observed state at knot
// `start`: one row per knot in [start, T), interior site order; row 0 is the
// observed start state itself.
Eigen::MatrixXd rollout_interior(const LearnedOperator& op, const BVPDataset& d, int start,
                                 const SolverConfig& solver);

// Interior RMSE of rollout_interior against the dataset over knots
// (start, T), i.e. excluding the given start state.
double rollout_rmse(const LearnedOperator& op, const BVPDataset& d, int start,
                    const SolverConfig& solver);

// Predictions for every site (columns in site order): interior sites from
// the rollout; boundary sites from the observed forcing series, or from the
// rolled state for the whole-graph ablation. Needs value boundary data.
Eigen::MatrixXd rollout_sites(const LearnedOperator& op, const BVPDataset& d, int start,
                              const SolverConfig& solver);

// Rollout errors for one evaluation regime.
struct SeriesReport {
  bool present = false;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> timestamps;  // knots the error is measured at
  Eigen::VectorXd per_site_rmse;   // interior site order
  Eigen::VectorXd per_knot_rmse;   // one entry per evaluated knot
  Eigen::MatrixXd predicted;       // (1 + evaluated knots) x interior, row 0 = start state
};

struct EvalReport {
  SeriesReport train;  // rollout across the training window from its first knot
  SeriesReport test;   // continuation across the post-horizon window from its first knot
  SeriesReport fresh;  // fresh trajectory, rollout from its first knot
  double noise_level = 0.0;  // from the training dataset's metadata
  double wall_ms = 0.0;      // diagnostic; reported in the manifest, not the report file
};

// Three-regime evaluation. test_d and new_d may be null; test_d is expected
// to start at the training horizon (its first knot overlaps the train
// window's last).
EvalReport evaluate(const LearnedOperator& op, const BVPDataset& train_d,
                    const BVPDataset* test_d, const BVPDataset* new_d,
                    const SolverConfig& solver);

}  // namespace biip
