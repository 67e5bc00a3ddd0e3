#include "trocar/solver.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace trocar {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 40;

struct LineSearchResult {
  bool accepted = false;
  JointVector q;
  double f = 0.0;
};

LineSearchResult backtrack(const KinematicChain& chain, const TaskParams& params, const BoxBounds& bounds,
                           const JointVector& q, double f, const JointVector& grad, const JointVector& step) {
  LineSearchResult out;
  const double slope = grad.dot(step);
  if (!(slope < 0.0)) return out;
  double t = 1.0;
  for (int k = 0; k < kMaxBacktracks; ++k, t *= kBacktrack) {
    JointVector trial = bounds.clamp(q + t * step);
    const double ft = objectiveValue(trial, params, chain);
    if (std::isfinite(ft) && ft <= f + kArmijo * t * slope) {
      out.accepted = true;
      out.q = std::move(trial);
      out.f = ft;
      return out;
    }
  }
  return out;
}

}  // namespace

StepBoundsResult stepBounds(const JointLimits& limits, const JointVector& q_prev, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step bounds: dt must be positive");
  }
  const int n = static_cast<int>(q_prev.size());
  limits.validate(n);

  StepBoundsResult out;
  JointVector centre = q_prev;
  if ((q_prev.array() < limits.q_min.array()).any() || (q_prev.array() > limits.q_max.array()).any()) {
    centre = q_prev.cwiseMax(limits.q_min).cwiseMin(limits.q_max);
    out.clamped = true;
    out.warning = "previous configuration outside position limits; clamped";
  }
  out.bounds.lower = limits.q_min.cwiseMax(centre - dt * limits.qdot_max);
  out.bounds.upper = limits.q_max.cwiseMin(centre + dt * limits.qdot_max);
  return out;
}

void SolverSettings::validate() const {
  if (max_iterations < 1 || qp_max_iterations < 1) {
    throw std::invalid_argument("solver: iteration limits must be at least 1");
  }
  if (!(step_tolerance > 0.0) || !(gauss_newton_damping >= 0.0)) {
    throw std::invalid_argument("solver: tolerances must be positive");
  }
}

SqpSolver::SqpSolver(SolverSettings settings) : settings_(settings) { settings_.validate(); }

SolveOutcome SqpSolver::solve(const KinematicChain& chain, const TaskParams& params, const BoxBounds& bounds) {
  const auto start_time = std::chrono::steady_clock::now();
  const int n = chain.dof();
  params.validate(n);
  if (bounds.lower.size() != n || bounds.upper.size() != n) {
    throw std::invalid_argument("bad joint vector length");
  }
  if ((bounds.lower.array() > bounds.upper.array()).any()) {
    throw std::invalid_argument("solver: empty feasible box");
  }

  SolveOutcome out;
  JointVector q = bounds.clamp(params.q_prev);
  double f = objectiveValue(q, params, chain);
  if (!std::isfinite(f)) {
    throw std::runtime_error("invalid initial state");
  }

  BoxBounds step_box;
  const JointVector zero = JointVector::Zero(n);

  for (int it = 1; it <= settings_.max_iterations; ++it) {
    out.iterations = it;
    const CostReport rep = totalObjective(q, params, chain);

    hessian_.noalias() = 2.0 * rep.residual_jacobian.transpose() * rep.residual_jacobian;
    hessian_ += rep.admittance_curvature;
    hessian_.diagonal().array() += settings_.gauss_newton_damping;

    step_box.lower = bounds.lower - q;
    step_box.upper = bounds.upper - q;
    const JointVector step = solveBoxQp(hessian_, rep.gradient, step_box, zero, settings_.qp_max_iterations).x;

    const double stationarity = projectedGradientNorm(q, rep.gradient, bounds);
    const bool stationary = stationarity <= 1e-9 * std::max(1.0, std::abs(f));
    if (step.norm() < settings_.step_tolerance && stationary) {
      out.converged = true;
      break;
    }

    LineSearchResult ls;
    if (step.norm() >= settings_.step_tolerance) {
      ls = backtrack(chain, params, bounds, q, f, rep.gradient, step);
    }
    if (!ls.accepted) {
      // Gauss-Newton direction unusable: projected-gradient step scaled by the
      // largest curvature.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian_, Eigen::EigenvaluesOnly);
      const double lmax = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
      const JointVector pg_step = bounds.clamp(q - rep.gradient / lmax) - q;
      ls = backtrack(chain, params, bounds, q, f, rep.gradient, pg_step);
    }
    if (!ls.accepted) {
      out.converged = stationary || step.norm() < settings_.step_tolerance;
      break;
    }

    const double moved = (ls.q - q).norm();
    q = std::move(ls.q);
    f = ls.f;
    if (moved < settings_.step_tolerance) {
      out.converged = true;
      break;
    }
  }

  out.q_star = bounds.clamp(q);
  out.final_total_cost = f;
  out.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return out;
}

}  // namespace trocar
