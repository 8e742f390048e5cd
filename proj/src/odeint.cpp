#include "biip/odeint.hpp"

#include <algorithm>
#include <cmath>

#include "biip/errors.hpp"

namespace biip {

std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::rk4_fixed: return "rk4_fixed";
    case SolverMethod::dopri5: return "dopri5";
    case SolverMethod::euler_fixed: return "euler_fixed";
  }
  throw SpecError("unknown solver method");
}

SolverMethod solver_method_from_string(const std::string& s) {
  if (s == "rk4_fixed") return SolverMethod::rk4_fixed;
  if (s == "dopri5") return SolverMethod::dopri5;
  if (s == "euler_fixed") return SolverMethod::euler_fixed;
  throw SpecError("unknown solver method: " + s);
}

namespace {

void require_finite(const Eigen::VectorXd& y, const char* where) {
  if (!y.allFinite()) throw DivergenceError(std::string("non-finite state in ") + where);
}

int fixed_step_count(double t0, double t1, double h, int max_steps, const char* where) {
  const double span = t1 - t0;
  if (span < 0.0) throw SpecError(std::string(where) + ": t1 must be >= t0");
  if (span == 0.0) return 0;
  if (!(h > 0.0)) throw SpecError(std::string(where) + ": fixed_step must be positive");
  // Equal steps, at most h each; the small slack forgives span/h landing a
  // hair above an integer through roundoff.
  const int n = std::max(1, static_cast<int>(std::ceil(span / h - 1e-9)));
  if (n > max_steps)
    throw DivergenceError(std::string(where) + ": step budget exceeded (" +
                          std::to_string(n) + " > " + std::to_string(max_steps) + ")");
  return n;
}

Eigen::VectorXd integrate_euler(const VectorField& f, Eigen::VectorXd y, double t0, double t1,
                                const SolverConfig& cfg, SolverStats* stats) {
  const int n = fixed_step_count(t0, t1, cfg.fixed_step, cfg.max_steps, "euler_fixed");
  const double h = n == 0 ? 0.0 : (t1 - t0) / n;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    y += h * f.eval(t, y);
    if (stats) {
      ++stats->steps_accepted;
      ++stats->field_evals;
    }
  }
  require_finite(y, "euler_fixed");
  return y;
}

Eigen::VectorXd rk4_step(const VectorField& f, double t, double h, const Eigen::VectorXd& y,
                         Eigen::VectorXd* k1_out, Eigen::VectorXd* k2_out,
                         Eigen::VectorXd* k3_out) {
  const Eigen::VectorXd k1 = f.eval(t, y);
  const Eigen::VectorXd k2 = f.eval(t + 0.5 * h, y + (0.5 * h) * k1);
  const Eigen::VectorXd k3 = f.eval(t + 0.5 * h, y + (0.5 * h) * k2);
  const Eigen::VectorXd k4 = f.eval(t + h, y + h * k3);
  if (k1_out) *k1_out = k1;
  if (k2_out) *k2_out = k2;
  if (k3_out) *k3_out = k3;
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd integrate_rk4(const VectorField& f, Eigen::VectorXd y, double t0, double t1,
                              const SolverConfig& cfg, SolverStats* stats) {
  const int n = fixed_step_count(t0, t1, cfg.fixed_step, cfg.max_steps, "rk4_fixed");
  const double h = n == 0 ? 0.0 : (t1 - t0) / n;
  for (int i = 0; i < n; ++i) {
    y = rk4_step(f, t0 + i * h, h, y, nullptr, nullptr, nullptr);
    if (stats) {
      ++stats->steps_accepted;
      stats->field_evals += 4;
    }
  }
  require_finite(y, "rk4_fixed");
  return y;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

Eigen::VectorXd integrate_dopri5(const VectorField& f, Eigen::VectorXd y, double t0, double t1,
                                 const SolverConfig& cfg, SolverStats* stats) {
  const double span = t1 - t0;
  if (span < 0.0) throw SpecError("dopri5: t1 must be >= t0");
  if (span == 0.0) return y;
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) throw SpecError("dopri5: tolerances must be positive");

  // Error measured in the max norm: max_i |err_i| / (atol + rtol |y_i|).
  const auto error_norm = [&cfg](const Eigen::VectorXd& err, const Eigen::VectorXd& ya,
                                 const Eigen::VectorXd& yb) {
    double m = 0.0;
    for (int i = 0; i < err.size(); ++i) {
      const double scale = cfg.atol + cfg.rtol * std::max(std::abs(ya(i)), std::abs(yb(i)));
      m = std::max(m, std::abs(err(i)) / scale);
    }
    return m;
  };

  double t = t0;
  Eigen::VectorXd k1 = f.eval(t, y);
  if (stats) ++stats->field_evals;

  // Initial step from the magnitude of y and its first two derivatives
  // (Hairer-Norsett-Wanner heuristic, simplified).
  double h;
  {
    const double d0 = y.norm(), d1 = k1.norm();
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, span);
    const Eigen::VectorXd y1 = y + h0 * k1;
    const Eigen::VectorXd f1 = f.eval(t + h0, y1);
    if (stats) ++stats->field_evals;
    const double d2 = (f1 - k1).norm() / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, span});
  }

  // PI step-size control with Lund stabilization.
  constexpr double safe = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;
  double fac_old = 1e-4;

  int steps = 0;
  while (t < t1) {
    if (++steps > cfg.max_steps) throw DivergenceError("dopri5: step budget exceeded");
    h = std::min(h, t1 - t);
    if (!(h > std::abs(t) * 1e-14 + 1e-300))
      throw DivergenceError("dopri5: step size underflow at t = " + std::to_string(t));

    const Eigen::VectorXd k2 = f.eval(t + c2 * h, y + h * (a21 * k1));
    const Eigen::VectorXd k3 = f.eval(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXd k4 = f.eval(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXd k5 =
        f.eval(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 =
        f.eval(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Eigen::VectorXd ynew =
        y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Eigen::VectorXd k7 = f.eval(t + h, ynew);  // FSAL
    if (stats) stats->field_evals += 6;

    const Eigen::VectorXd err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double norm = error_norm(err, y, ynew);

    if (!std::isfinite(norm)) throw DivergenceError("dopri5: non-finite error estimate");
    if (norm <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;
      if (stats) ++stats->steps_accepted;
      const double fac11 = std::pow(std::max(norm, 1e-16), expo1);
      double fac = fac11 / std::pow(fac_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      h = h / fac;
      fac_old = std::max(norm, 1e-4);
    } else {
      if (stats) ++stats->steps_rejected;
      const double fac11 = std::pow(norm, expo1);
      h = h / std::min(1.0 / fac_min, fac11 / safe);
    }
  }
  require_finite(y, "dopri5");
  return y;
}

}  // namespace

Eigen::VectorXd integrate(const VectorField& f, const Eigen::VectorXd& y0, double t0,
                          double t1, const SolverConfig& cfg, SolverStats* stats) {
  require_finite(y0, "initial state");
  switch (cfg.method) {
    case SolverMethod::euler_fixed: return integrate_euler(f, y0, t0, t1, cfg, stats);
    case SolverMethod::rk4_fixed: return integrate_rk4(f, y0, t0, t1, cfg, stats);
    case SolverMethod::dopri5: return integrate_dopri5(f, y0, t0, t1, cfg, stats);
  }
  throw SpecError("unknown solver method");
}

Eigen::VectorXd Rk4Tape::replay(const VectorField& f) const {
  if (steps.empty()) return y1;
  Eigen::VectorXd y = steps.front().y;
  for (const Step& s : steps) y = rk4_step(f, s.t, s.h, y, nullptr, nullptr, nullptr);
  return y;
}

Rk4Tape rk4_record(const VectorField& f, const Eigen::VectorXd& y0, double t0, double t1,
                   const SolverConfig& cfg) {
  if (cfg.method != SolverMethod::rk4_fixed)
    throw SpecError("rk4_record supports rk4_fixed only");
  require_finite(y0, "initial state");

  const int n = fixed_step_count(t0, t1, cfg.fixed_step, cfg.max_steps, "rk4_fixed");
  const double h = n == 0 ? 0.0 : (t1 - t0) / n;

  Rk4Tape tape;
  tape.steps.reserve(n);
  Eigen::VectorXd y = y0;
  for (int i = 0; i < n; ++i) {
    Rk4Tape::Step s;
    s.t = t0 + i * h;
    s.h = h;
    s.y = y;
    y = rk4_step(f, s.t, s.h, y, &s.k1, &s.k2, &s.k3);
    tape.steps.push_back(std::move(s));
  }
  require_finite(y, "rk4_fixed");
  tape.y1 = std::move(y);
  return tape;
}

GradientResult rk4_pullback(const DifferentiableField& f, const Rk4Tape& tape,
                            const Eigen::VectorXd& loss_cotangent) {
  if (loss_cotangent.size() != tape.y1.size())
    throw SpecError("loss cotangent must match the state dimension");

  // Reverse sweep. For one step
  //   y+ = y + h/6 (k1 + 2 k2 + 2 k3 + k4),   ki = F(ti, Yi),
  //   Y1 = y, Y2 = y + h/2 k1, Y3 = y + h/2 k2, Y4 = y + h k3,
  // the cotangent w = dL/dy+ pulls back stage by stage; each vjp also
  // accumulates the parameter gradient.
  const auto size = loss_cotangent.size();
  Eigen::VectorXd w = loss_cotangent;
  Eigen::VectorXd param_grad = Eigen::VectorXd::Zero(f.param_count());
  Eigen::VectorXd a1(size), a2(size), a3(size), a4(size);
  for (int i = static_cast<int>(tape.steps.size()) - 1; i >= 0; --i) {
    const Rk4Tape::Step& s = tape.steps[i];
    const double hh = s.h;
    const Eigen::VectorXd y4 = s.y + hh * s.k3;
    const Eigen::VectorXd y3 = s.y + (0.5 * hh) * s.k2;
    const Eigen::VectorXd y2 = s.y + (0.5 * hh) * s.k1;

    f.vjp(s.t + hh, y4, (hh / 6.0) * w, a4, param_grad);
    f.vjp(s.t + 0.5 * hh, y3, (hh / 3.0) * w + hh * a4, a3, param_grad);
    f.vjp(s.t + 0.5 * hh, y2, (hh / 3.0) * w + (0.5 * hh) * a3, a2, param_grad);
    f.vjp(s.t, s.y, (hh / 6.0) * w + (0.5 * hh) * a2, a1, param_grad);
    w += a1 + a2 + a3 + a4;
  }
  if (!w.allFinite() || !param_grad.allFinite())
    throw NumericError("non-finite gradient in reverse sweep");

  GradientResult out;
  out.y1 = tape.y1;
  out.param_grad = std::move(param_grad);
  out.y0_grad = std::move(w);
  return out;
}

GradientResult integrate_with_gradient(const DifferentiableField& f,
                                       const Eigen::VectorXd& y0, double t0, double t1,
                                       const SolverConfig& cfg,
                                       const Eigen::VectorXd& loss_cotangent,
                                       Rk4Tape* tape_out) {
  Rk4Tape tape = rk4_record(f, y0, t0, t1, cfg);
  GradientResult out = rk4_pullback(f, tape, loss_cotangent);
  if (tape_out) *tape_out = std::move(tape);
  return out;
}

double order_check(const VectorField& f, const Eigen::VectorXd& y0, double t0, double t1,
                   const std::function<Eigen::VectorXd(double)>& exact, SolverMethod method,
                   double base_step) {
  SolverConfig cfg;
  cfg.method = method;
  cfg.max_steps = 1 << 24;
  cfg.fixed_step = base_step;
  const double e1n = (integrate(f, y0, t0, t1, cfg) - exact(t1)).norm();
  cfg.fixed_step = base_step / 2.0;
  const double e2n = (integrate(f, y0, t0, t1, cfg) - exact(t1)).norm();
  if (e1n == 0.0 || e2n == 0.0)
    throw NumericError("order_check: error vanished; pick a coarser base step");
  return std::log2(e1n / e2n);
}

}  // namespace biip
