#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace biip {

enum class SolverMethod { rk4_fixed, dopri5, euler_fixed };

std::string to_string(SolverMethod m);
SolverMethod solver_method_from_string(const std::string& s);

struct SolverConfig {
  SolverMethod method = SolverMethod::dopri5;
  // Fixed-step methods: target step size; the span is divided into equal
  // steps no larger than this. <= 0 lets the caller substitute a default.
  double fixed_step = 0.0;
  double rtol = 1e-6;
  double atol = 1e-8;
  int max_steps = 100000;
};

struct SolverStats {
  int steps_accepted = 0;
  int steps_rejected = 0;
  int field_evals = 0;
};

// Time-dependent right-hand side dy/dt = eval(t, y).
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual Eigen::VectorXd eval(double t, const Eigen::VectorXd& y) const = 0;
};

// Right-hand side with reverse-mode support: pulls a cotangent w back through
// one evaluation, accumulating w^T dF/dy into y_cotangent (overwritten) and
// w^T dF/dtheta into param_grad (added).
class DifferentiableField : public VectorField {
 public:
  virtual int param_count() const = 0;
  virtual void vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                   Eigen::VectorXd& y_cotangent, Eigen::VectorXd& param_grad) const = 0;
};

// Integrates y' = f(t, y) from (t0, y0) to t1. Throws DivergenceError on
// non-finite states, step-count exhaustion, or step-size underflow.
Eigen::VectorXd integrate(const VectorField& f, const Eigen::VectorXd& y0, double t0,
                          double t1, const SolverConfig& cfg, SolverStats* stats = nullptr);

// Recorded forward pass of the fixed-step classical Runge-Kutta scheme:
// per-step base state and the first three stage slopes are enough to rebuild
// every stage state in the reverse sweep.
struct Rk4Tape {
  struct Step {
    double t, h;
    Eigen::VectorXd y, k1, k2, k3;
  };
  std::vector<Step> steps;
  Eigen::VectorXd y1;

  // Re-runs the recorded forward pass; bit-identical to y1 by construction.
  Eigen::VectorXd replay(const VectorField& f) const;
};

struct GradientResult {
  Eigen::VectorXd y1;          // state at t1
  Eigen::VectorXd param_grad;  // d(loss) / d(theta)
  Eigen::VectorXd y0_grad;     // d(loss) / d(y0)
};

// Forward pass of the fixed-step RK4 scheme with the tape recorded; the
// endpoint lands in tape.y1. Step count is capped by cfg.max_steps and the
// method must be rk4_fixed. Splitting record from pullback lets the caller
// derive the loss cotangent from the endpoint before sweeping back.
Rk4Tape rk4_record(const VectorField& f, const Eigen::VectorXd& y0, double t0, double t1,
                   const SolverConfig& cfg);

// Reverse sweep over a recorded tape: pulls loss_cotangent (= d loss / d y1)
// back to the parameters and the initial state.
GradientResult rk4_pullback(const DifferentiableField& f, const Rk4Tape& tape,
                            const Eigen::VectorXd& loss_cotangent);

// Discretize-then-optimize reverse mode through the unrolled RK4 update:
// rk4_record followed by rk4_pullback, for callers that know the cotangent
// up front.
GradientResult integrate_with_gradient(const DifferentiableField& f,
                                       const Eigen::VectorXd& y0, double t0, double t1,
                                       const SolverConfig& cfg,
                                       const Eigen::VectorXd& loss_cotangent,
                                       Rk4Tape* tape_out = nullptr);

// Empirical convergence order of a fixed-step method on a field with known
// solution, from the error ratio at step h vs h/2.
double order_check(const VectorField& f, const Eigen::VectorXd& y0, double t0, double t1,
                   const std::function<Eigen::VectorXd(double)>& exact, SolverMethod method,
                   double base_step);

}  // namespace biip
