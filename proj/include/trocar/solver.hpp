#pragma once

#include "trocar/kinematics.hpp"
#include "trocar/task_model.hpp"

#include <string>

namespace trocar {

struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
};

struct StepBoundsResult {
  BoxBounds bounds;
  // Set when q_prev lay outside the position limits and had to be clamped.
  bool clamped = false;
  std::string warning;
};

// Per-cycle feasible set: position limits intersected with what the velocity
// limits allow within dt of q_prev.
StepBoundsResult stepBounds(const JointLimits& limits, const JointVector& q_prev, double dt);

struct BoxQpResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double kkt_residual = 0.0;
};

// min 0.5 x'Hx + g'x  s.t.  lower <= x <= upper, H symmetric positive
// semidefinite. Primal active-set method; start must be feasible.
BoxQpResult solveBoxQp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const BoxBounds& bounds,
                       const Eigen::VectorXd& start, int max_iterations = 200);

// Norm of the projected gradient, i.e. the box-QP first-order residual.
double projectedGradientNorm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, const BoxBounds& bounds);

struct SolverSettings {
  int max_iterations = 50;
  double step_tolerance = 1e-8;
  double gauss_newton_damping = 1e-9;
  int qp_max_iterations = 200;

  void validate() const;
};

struct SolveOutcome {
  JointVector q_star;
  int iterations = 0;
  bool converged = false;
  double final_total_cost = 0.0;
  double solve_time = 0.0;  // seconds
};

// Gauss-Newton SQP for the weighted task objective over a box. Holds its
// scratch state; one instance per control loop.
class SqpSolver {
 public:
  explicit SqpSolver(SolverSettings settings = {});

  const SolverSettings& settings() const { return settings_; }

  // Warm-starts at params.q_prev clamped into bounds.
  SolveOutcome solve(const KinematicChain& chain, const TaskParams& params, const BoxBounds& bounds);

 private:
  SolverSettings settings_;
  Eigen::MatrixXd hessian_;
};

inline SolveOutcome solve(const KinematicChain& chain, const TaskParams& params, const BoxBounds& bounds,
                          const SolverSettings& settings = {}) {
  return SqpSolver(settings).solve(chain, params, bounds);
}

}  // namespace trocar
