#pragma once

#include "trocar/kinematics.hpp"

#include <array>

namespace trocar {

enum class CostTerm : int {
  kAxisLine = 1,    // tip onto the insertion line
  kGoal = 2,        // tip onto the goal point
  kAxisAlign = 3,   // optical axis onto the insertion direction
  kJointMotion = 4, // stay close to the previous configuration
  kAdmittance = 5,  // tip onto the admittance reference
};

inline constexpr int kNumTerms = 5;

using Weights = std::array<double, kNumTerms>;

// Sensed parameters of one control cycle. Immutable once built; the control
// loop replaces it every cycle.
struct TaskParams {
  Vec3 axis_anchor = Vec3::Zero();
  Vec3 insertion_axis = Vec3::UnitZ();
  Vec3 goal = Vec3::Zero();
  Vec3 admittance_ref = Vec3::Zero();
  JointVector q_prev;
  Weights weights = {20.0, 10.0, 10.0, 1.0, 50.0};
  double c5_smoothing = 1e-4;
  // Mask over the five terms. Force feedback toggles the last entry; the
  // remaining entries exist so tests can isolate single terms.
  std::array<bool, kNumTerms> active = {true, true, true, true, true};

  void setForceFeedback(bool enabled) { active[4] = enabled; }
  bool forceFeedback() const { return active[4]; }

  void validate(int n) const;
};

struct TermValue {
  double value = 0.0;
  JointVector gradient;
};

// Result of evaluating the full objective at one configuration. Inactive
// terms report zero value and zero gradient.
struct CostReport {
  std::array<double, kNumTerms> values{};
  double total = 0.0;
  JointVector gradient;
  Eigen::MatrixXd term_gradients;  // 5 x n

  // Stacked sqrt(w_i)-scaled residuals of the squared terms 1..4, so that
  // their weighted sum equals residuals.squaredNorm(), and the Jacobian of
  // that stack.
  Eigen::VectorXd residuals;
  Eigen::MatrixXd residual_jacobian;

  // Gauss-Newton curvature of w5 * c5 (exact curvature of the smoothed norm,
  // pulled back through the tip Jacobian). Zero when c5 is inactive.
  Eigen::MatrixXd admittance_curvature;
};

Vec3 nearestPointOnLine(const Vec3& p, const Vec3& anchor, const Vec3& dir);

// Value and gradient of a single unweighted term, 1-based index.
TermValue evaluateCost(int term, const JointVector& q, const TaskParams& params,
                       const KinematicChain& chain);

CostReport totalObjective(const JointVector& q, const TaskParams& params,
                          const KinematicChain& chain);

// Weighted objective value only; used by line searches.
double objectiveValue(const JointVector& q, const TaskParams& params, const KinematicChain& chain);

// 3 x n Jacobian of the optical axis by central differences.
Jacobian3 opticalAxisJacobian(const KinematicChain& chain, const JointVector& q, double h = 1e-6);

}  // namespace trocar
