#pragma once

#include "trocar/kinematics.hpp"

namespace trocar {

struct ForceEstimate {
  Vec3 f_ext = Vec3::Zero();
  double residual = 0.0;      // |J^T f - tau|, N m
  double conditioning = 0.0;  // smallest singular value of J_lin
};

// Tip force from external joint torques. J_lin is 3 x n, so J^{-T} tau is
// taken as the damped least-squares solution of J^T f = tau:
//   f = (J J^T + delta I)^{-1} J tau,  delta = damping * sigma_max^2.
// With damping = 0 this is the minimum-norm least-squares solution.
ForceEstimate estimateTipForce(const KinematicChain& chain, const JointVector& q_c,
                               const Eigen::VectorXd& tau, double damping = 1e-6);

ForceEstimate estimateForceFromJacobian(const Jacobian3& jac, const Eigen::VectorXd& tau, double damping = 1e-6);

struct AdmittanceParams {
  double gain_alpha = 0.005;    // m/N
  double filter_beta = 0.9;     // per-cycle low-pass coefficient
  double force_deadband = 0.5;  // N

  void validate() const;
};

struct AdmittanceState {
  Vec3 r = Vec3::Zero();
  Vec3 f_filtered = Vec3::Zero();
  AdmittanceParams params;
};

// Removes the deadband from the magnitude of f, keeping its direction.
Vec3 applyDeadband(const Vec3& f, double deadband);

// Low-pass the estimate, remove the deadband and offset the reference from
// the current tip along the remaining force: the tip is asked to yield.
AdmittanceState admittanceUpdate(const AdmittanceState& state, const Vec3& tip, const ForceEstimate& force,
                                 double dt);

}  // namespace trocar
