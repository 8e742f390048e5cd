#include "biip/trainer.hpp"

#include <chrono>
#include <cmath>

#include "biip/complex.hpp"
#include "biip/errors.hpp"

namespace biip {

std::string to_string(OperatorVariant v) {
  switch (v) {
    case OperatorVariant::teacher_forced: return "teacher_forced";
    case OperatorVariant::vanilla: return "vanilla";
    case OperatorVariant::oracle_linear: return "oracle_linear";
  }
  throw SpecError("unknown operator variant");
}

OperatorVariant operator_variant_from_string(const std::string& s) {
  if (s == "teacher_forced") return OperatorVariant::teacher_forced;
  if (s == "vanilla") return OperatorVariant::vanilla;
  if (s == "oracle_linear") return OperatorVariant::oracle_linear;
  throw SpecError("unknown operator variant: " + s);
}

bool adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               const AdamConfig& cfg) {
  if (params.size() != grad.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw SpecError("adam_step: shape mismatch");
  if (!grad.allFinite()) return false;
  ++state.step;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.array() -= cfg.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
  return true;
}

TeacherForcedField::TeacherForcedField(const ModelParams& m, const BVPDataset& d,
                                       const MessageGraph& mg)
    : model_(m), data_(d), mg_(mg) {}

Eigen::VectorXd TeacherForcedField::eval(double t, const Eigen::VectorXd& y) const {
  const BoundarySnapshot snap = interpolate_boundary(data_, t, /*clamp=*/true);
  return forward_teacher_forced(model_, y, snap, mg_);
}

void TeacherForcedField::vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                             Eigen::VectorXd& y_cotangent, Eigen::VectorXd& param_grad) const {
  const BoundarySnapshot snap = interpolate_boundary(data_, t, /*clamp=*/true);
  const MpTrace trace = forward_traced(model_, y.transpose(), &snap, mg_, true);
  Eigen::MatrixXd x0_cot;
  backward_traced(model_, trace, w.transpose(), mg_, true, x0_cot, param_grad);
  y_cotangent = x0_cot.row(0).transpose();
}

VanillaField::VanillaField(const ModelParams& m, const MessageGraph& mg)
    : model_(m), mg_(mg) {}

Eigen::VectorXd VanillaField::eval(double, const Eigen::VectorXd& y) const {
  return forward_vanilla(model_, y, mg_);
}

void VanillaField::vjp(double, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       Eigen::VectorXd& y_cotangent, Eigen::VectorXd& param_grad) const {
  const MpTrace trace = forward_traced(model_, y.transpose(), nullptr, mg_, false);
  Eigen::MatrixXd x0_cot;
  backward_traced(model_, trace, w.transpose(), mg_, false, x0_cot, param_grad);
  y_cotangent = x0_cot.row(0).transpose();
}

OracleLinearField::OracleLinearField(const BVPDataset& d, double alpha)
    : data_(d), alpha_(alpha) {
  d.validate();
  const int ni = static_cast<int>(d.interior_index.size());
  const int nb = static_cast<int>(d.boundary_index.size());
  std::vector<Eigen::Triplet<double>> tii, tib;

  if (d.kind == BoundaryKind::neumann) {
    const MessageGraph mg(d.graph, 0);
    if (mg.interior_count() != ni || mg.half_edge_count() != nb)
      throw SpecError("flux dataset does not match its graph");
    // Interior rows of the graph Laplacian regrouped around the fluxes:
    // (Lf)(u) = deg_int(u) f(u) - sum_int f(w) - sum of outward fluxes at u.
    const auto& adj = mg.interior_adjacency();
    for (int c = 0; c < adj.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(adj, c); it; ++it)
        tii.emplace_back(static_cast<int>(it.row()), c, -it.value());
    for (int a = 0; a < ni; ++a) tii.emplace_back(a, a, mg.interior_neighbor_count()(a));
    const auto& p = mg.boundary_slots(BoundaryKind::neumann);  // half edges x interior
    for (int c = 0; c < p.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(p, c); it; ++it)
        tib.emplace_back(c, static_cast<int>(it.row()), -it.value());
  } else {
    OrientedCliqueComplex cx(d.graph, std::min(d.level + 1, OrientedCliqueComplex::kMaxLevel));
    const auto& lap = cx.hodge_laplacian(d.level);
    std::vector<int> role(lap.rows(), -1), pos(lap.rows(), 0);  // 0 interior, 1 boundary
    for (int a = 0; a < ni; ++a) {
      const int idx = cx.index_of(d.level, d.interior_index[a]);
      if (idx < 0) throw SpecError("interior clique missing from the complex");
      role[idx] = 0;
      pos[idx] = a;
    }
    for (int b = 0; b < nb; ++b) {
      const int idx = cx.index_of(d.level, d.boundary_index[b]);
      if (idx < 0) throw SpecError("boundary clique missing from the complex");
      role[idx] = 1;
      pos[idx] = b;
    }
    for (int col = 0; col < lap.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(lap, col); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (role[r] != 0) continue;  // only interior coordinates evolve here
        if (role[col] == 0)
          tii.emplace_back(pos[r], pos[col], it.value());
        else if (role[col] == 1)
          tib.emplace_back(pos[r], pos[col], it.value());
        else
          throw SpecError("clique not covered by the dataset index sets");
      }
  }
  l_ii_.resize(ni, ni);
  l_ii_.setFromTriplets(tii.begin(), tii.end());
  l_ib_.resize(ni, nb);
  l_ib_.setFromTriplets(tib.begin(), tib.end());
}

Eigen::VectorXd OracleLinearField::eval(double t, const Eigen::VectorXd& y) const {
  const Eigen::VectorXd beta = interpolate_boundary(data_, t, /*clamp=*/true).values;
  return -alpha_ * (l_ii_ * y + l_ib_ * beta);
}

namespace {

void check_model_matches(const ModelParams& m, const BVPDataset& d) {
  m.validate();
  if (m.level != d.level || m.message_kind != d.kind)
    throw SpecError("model and dataset kinds do not match");
}

}  // namespace

std::unique_ptr<VectorField> make_field(const LearnedOperator& op, const BVPDataset& d,
                                        const MessageGraph& mg) {
  switch (op.variant) {
    case OperatorVariant::teacher_forced:
      check_model_matches(op.model, d);
      return std::make_unique<TeacherForcedField>(op.model, d, mg);
    case OperatorVariant::vanilla:
      check_model_matches(op.model, d);
      if (d.kind != BoundaryKind::dirichlet)
        throw SpecError("the whole-graph ablation needs boundary values, flux data has none");
      return std::make_unique<VanillaField>(op.model, mg);
    case OperatorVariant::oracle_linear:
      return std::make_unique<OracleLinearField>(d, op.oracle_alpha);
  }
  throw SpecError("unknown operator variant");
}

Eigen::VectorXd full_state_at(const BVPDataset& d, const MessageGraph& mg, int knot) {
  if (d.kind != BoundaryKind::dirichlet)
    throw SpecError("full-graph state needs boundary values, not fluxes");
  if (knot < 0 || knot >= d.knot_count()) throw SpecError("full_state_at: knot out of range");
  const auto& is = mg.interior_sites();
  const auto& bs = mg.boundary_sites();
  if (static_cast<int>(is.size()) != d.interior_obs.cols() ||
      static_cast<int>(bs.size()) != d.boundary_obs.cols())
    throw SpecError("full_state_at: dataset does not match the message graph");
  Eigen::VectorXd y(mg.site_count());
  for (std::size_t a = 0; a < is.size(); ++a) y(is[a]) = d.interior_obs(knot, a);
  for (std::size_t b = 0; b < bs.size(); ++b) y(bs[b]) = d.boundary_obs(knot, b);
  return y;
}

void TrainConfig::validate(const BVPDataset& d) const {
  if (epochs < 0) throw SpecError("epochs must be >= 0");
  if (segment_length < 1) throw SpecError("segment_length must be >= 1");
  if (segment_length >= d.knot_count())
    throw SpecError("segment_length must be smaller than the number of knots");
  if (!(adam.lr >= 0.0)) throw SpecError("learning rate must be >= 0");
  if (solver.method != SolverMethod::rk4_fixed)
    throw SpecError("training requires the differentiable fixed-step scheme (rk4_fixed)");
}

std::pair<int, int> sample_segment(const BVPDataset& d, int m, Rng& rng) {
  const int t = d.knot_count();
  if (m < 1 || m >= t) throw SpecError("segment length must satisfy 1 <= m < knots");
  const int i = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(t - m)));
  return {i, i + m};
}

namespace {

// Per-interval solver settings: an unset fixed step becomes span / 8 for the
// classical scheme and the full span (one step, matching the generator's
// grid) for the explicit Euler replay.
SolverConfig interval_config(const SolverConfig& base, double span) {
  SolverConfig c = base;
  if (c.fixed_step <= 0.0)
    c.fixed_step = c.method == SolverMethod::euler_fixed ? span : span / 8.0;
  return c;
}

Eigen::VectorXd advance_one(const VectorField& f, const Eigen::VectorXd& y, double t0,
                            double t1, const SolverConfig& base) {
  return integrate(f, y, t0, t1, interval_config(base, t1 - t0));
}

struct SegmentStep {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Endpoint loss and parameter gradient of one segment rollout, integrating
// knot to knot so the interpolated boundary stays smooth inside every step.
SegmentStep segment_step(const LearnedOperator& op, const BVPDataset& d,
                         const MessageGraph& mg, std::pair<int, int> seg,
                         const SolverConfig& solver) {
  const bool full = op.variant == OperatorVariant::vanilla;
  std::unique_ptr<DifferentiableField> field;
  if (full)
    field = std::make_unique<VanillaField>(op.model, mg);
  else
    field = std::make_unique<TeacherForcedField>(op.model, d, mg);

  Eigen::VectorXd y =
      full ? full_state_at(d, mg, seg.first) : d.interior_obs.row(seg.first).transpose();
  const Eigen::VectorXd target =
      full ? full_state_at(d, mg, seg.second) : d.interior_obs.row(seg.second).transpose();

  std::vector<Rk4Tape> tapes;
  tapes.reserve(seg.second - seg.first);
  for (int k = seg.first; k < seg.second; ++k) {
    const double t0 = d.timestamps[k], t1 = d.timestamps[k + 1];
    tapes.push_back(rk4_record(*field, y, t0, t1, interval_config(solver, t1 - t0)));
    y = tapes.back().y1;
  }

  const double n = static_cast<double>(y.size());
  SegmentStep out;
  out.loss = (y - target).squaredNorm() / n;
  Eigen::VectorXd w = (2.0 / n) * (y - target);
  out.grad = Eigen::VectorXd::Zero(field->param_count());
  for (int k = static_cast<int>(tapes.size()) - 1; k >= 0; --k) {
    GradientResult r = rk4_pullback(*field, tapes[k], w);
    out.grad += r.param_grad;
    w = std::move(r.y0_grad);
  }
  return out;
}

}  // namespace

double segment_loss(const ModelParams& model, const BVPDataset& d, std::pair<int, int> seg,
                    const SolverConfig& solver) {
  if (seg.first < 0 || seg.second <= seg.first || seg.second >= d.knot_count())
    throw SpecError("segment indices out of range");
  const MessageGraph mg(d.graph, d.level);
  const TeacherForcedField field(model, d, mg);
  Eigen::VectorXd y = d.interior_obs.row(seg.first).transpose();
  for (int k = seg.first; k < seg.second; ++k)
    y = advance_one(field, y, d.timestamps[k], d.timestamps[k + 1], solver);
  return (y - d.interior_obs.row(seg.second).transpose()).squaredNorm() /
         static_cast<double>(y.size());
}

double segment_loss_with_gradient(const LearnedOperator& op, const BVPDataset& d,
                                  std::pair<int, int> seg, const SolverConfig& solver,
                                  Eigen::VectorXd& grad) {
  if (op.variant == OperatorVariant::oracle_linear)
    throw SpecError("the analytic reference has no trainable parameters");
  if (seg.first < 0 || seg.second <= seg.first || seg.second >= d.knot_count())
    throw SpecError("segment indices out of range");
  if (op.variant == OperatorVariant::vanilla && d.kind != BoundaryKind::dirichlet)
    throw SpecError("the whole-graph ablation needs boundary values, flux data has none");
  const MessageGraph mg(d.graph, d.level);
  SegmentStep s = segment_step(op, d, mg, seg, solver);
  grad = std::move(s.grad);
  return s.loss;
}

TrainResult train(const LearnedOperator& init, const BVPDataset& d, const BVPDataset* val,
                  const TrainConfig& cfg) {
  if (init.variant == OperatorVariant::oracle_linear)
    throw SpecError("the analytic reference has no trainable parameters");
  d.validate();
  cfg.validate(d);
  check_model_matches(init.model, d);
  if (init.variant == OperatorVariant::vanilla && d.kind != BoundaryKind::dirichlet)
    throw SpecError("the whole-graph ablation needs boundary values, flux data has none");

  const MessageGraph mg(d.graph, d.level);
  if (mg.interior_count() != d.interior_obs.cols())
    throw SpecError("dataset interior columns do not match the graph");

  TrainResult res;
  res.op = init;
  Eigen::VectorXd theta = init.model.flatten();
  AdamState st(theta.size());
  Rng rng(cfg.seed);
  res.log.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t_begin = std::chrono::steady_clock::now();
    // Draw before the attempt so the segment stream is the same whether or
    // not earlier epochs diverged.
    const std::pair<int, int> seg = sample_segment(d, cfg.segment_length, rng);
    EpochLog entry;
    entry.epoch = epoch;
    try {
      const SegmentStep step = segment_step(res.op, d, mg, seg, cfg.solver);
      if (!std::isfinite(step.loss))
        throw NumericError("training aborted: non-finite loss at epoch " +
                           std::to_string(epoch) + " on segment [" +
                           std::to_string(seg.first) + ", " + std::to_string(seg.second) +
                           "], parameter norm " + std::to_string(theta.norm()));
      entry.train_mse = step.loss;
      if (!adam_step(st, theta, step.grad, cfg.adam)) ++res.skipped_updates;
      res.op.model.unflatten(theta);
    } catch (const DivergenceError&) {
      // The rollout blew up under the current parameters: skip this update
      // and move on; the log records the hole.
      entry.skipped = true;
      ++res.diverged_segments;
    }
    if (val) {
      try {
        entry.val_rmse = rollout_rmse(res.op, *val, 0, cfg.solver);
      } catch (const DivergenceError&) {
        // leave NaN
      }
    }
    entry.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t_begin)
                        .count();
    res.log.push_back(entry);
  }
  return res;
}

namespace {

// One row per knot in [start, T) over the field's own state layout: interior
// sites, or every site for the whole-graph ablation.
Eigen::MatrixXd rollout_states(const LearnedOperator& op, const BVPDataset& d,
                               const MessageGraph& mg, int start, const SolverConfig& solver) {
  d.validate();
  if (start < 0 || start >= d.knot_count())
    throw SpecError("rollout start knot out of range");
  const std::unique_ptr<VectorField> field = make_field(op, d, mg);
  const bool full = op.variant == OperatorVariant::vanilla;

  Eigen::VectorXd y =
      full ? full_state_at(d, mg, start) : d.interior_obs.row(start).transpose();
  Eigen::MatrixXd out(d.knot_count() - start, y.size());
  out.row(0) = y.transpose();
  for (int k = start; k + 1 < d.knot_count(); ++k) {
    y = advance_one(*field, y, d.timestamps[k], d.timestamps[k + 1], solver);
    out.row(k + 1 - start) = y.transpose();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd rollout_interior(const LearnedOperator& op, const BVPDataset& d, int start,
                                 const SolverConfig& solver) {
  const MessageGraph mg(d.graph, d.level);
  const Eigen::MatrixXd states = rollout_states(op, d, mg, start, solver);
  if (op.variant != OperatorVariant::vanilla) return states;
  const int ni = static_cast<int>(d.interior_index.size());
  Eigen::MatrixXd out(states.rows(), ni);
  for (int a = 0; a < ni; ++a) out.col(a) = states.col(mg.interior_sites()[a]);
  return out;
}

Eigen::MatrixXd rollout_sites(const LearnedOperator& op, const BVPDataset& d, int start,
                              const SolverConfig& solver) {
  if (d.kind != BoundaryKind::dirichlet)
    throw SpecError("site-level predictions need boundary values, not fluxes");
  const MessageGraph mg(d.graph, d.level);
  const Eigen::MatrixXd states = rollout_states(op, d, mg, start, solver);
  if (op.variant == OperatorVariant::vanilla) return states;
  // Boundary-driven operators only evolve the interior; the boundary columns
  // carry the forcing they were driven with.
  Eigen::MatrixXd out(states.rows(), mg.site_count());
  for (int a = 0; a < static_cast<int>(mg.interior_sites().size()); ++a)
    out.col(mg.interior_sites()[a]) = states.col(a);
  for (int b = 0; b < static_cast<int>(mg.boundary_sites().size()); ++b)
    out.col(mg.boundary_sites()[b]) =
        d.boundary_obs.block(start, b, states.rows(), 1);
  return out;
}

double rollout_rmse(const LearnedOperator& op, const BVPDataset& d, int start,
                    const SolverConfig& solver) {
  const Eigen::MatrixXd pred = rollout_interior(op, d, start, solver);
  const int rows = static_cast<int>(pred.rows()) - 1;
  if (rows < 1) throw SpecError("rollout needs at least one knot past the start");
  const Eigen::MatrixXd err =
      pred.bottomRows(rows) - d.interior_obs.middleRows(start + 1, rows);
  return std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
}

namespace {

SeriesReport series_for(const LearnedOperator& op, const BVPDataset& d,
                        const SolverConfig& solver) {
  SeriesReport s;
  s.present = true;
  s.predicted = rollout_interior(op, d, 0, solver);
  const int rows = static_cast<int>(s.predicted.rows()) - 1;
  if (rows < 1) throw SpecError("evaluation window needs at least two knots");
  const Eigen::MatrixXd err = s.predicted.bottomRows(rows) - d.interior_obs.bottomRows(rows);
  s.rmse = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
  s.timestamps.assign(d.timestamps.begin() + 1, d.timestamps.end());
  s.per_site_rmse = err.array().square().colwise().mean().sqrt().matrix().transpose();
  s.per_knot_rmse = err.array().square().rowwise().mean().sqrt().matrix();
  return s;
}

}  // namespace

EvalReport evaluate(const LearnedOperator& op, const BVPDataset& train_d,
                    const BVPDataset* test_d, const BVPDataset* new_d,
                    const SolverConfig& solver) {
  const auto t_begin = std::chrono::steady_clock::now();
  EvalReport rep;
  rep.noise_level = train_d.noise_level;
  rep.train = series_for(op, train_d, solver);
  if (test_d) rep.test = series_for(op, *test_d, solver);
  if (new_d) rep.fresh = series_for(op, *new_d, solver);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t_begin)
                    .count();
  return rep;
}

}  // namespace biip
