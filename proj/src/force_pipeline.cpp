#include "trocar/force_pipeline.hpp"

#include <Eigen/SVD>

#include <stdexcept>

namespace trocar {

ForceEstimate estimateForceFromJacobian(const Jacobian3& jac, const Eigen::VectorXd& tau, double damping) {
  if (tau.size() != jac.cols()) {
    throw std::invalid_argument("bad joint vector length");
  }
  if (!tau.allFinite()) {
    throw std::invalid_argument("external torques must be finite");
  }
  if (damping < 0.0) {
    throw std::invalid_argument("force estimate: damping must be non-negative");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
  if (!(sigma_max > 0.0)) {
    throw std::domain_error("force unobservable at this configuration");
  }
  const double delta = damping * sigma_max * sigma_max;
  const double cutoff = sigma_max * 1e-12 * static_cast<double>(std::max<Eigen::Index>(jac.cols(), 3));

  // f = sum_i sigma_i / (sigma_i^2 + delta) u_i v_i^T tau over non-zero sigma_i.
  ForceEstimate est;
  const Eigen::VectorXd vt_tau = svd.matrixV().transpose() * tau;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] <= cutoff) continue;
    est.f_ext += (sigma[i] / (sigma[i] * sigma[i] + delta) * vt_tau[i]) * svd.matrixU().col(i);
  }
  est.conditioning = sigma.size() == 3 ? sigma[2] : 0.0;
  est.residual = (jac.transpose() * est.f_ext - tau).norm();
  return est;
}

ForceEstimate estimateTipForce(const KinematicChain& chain, const JointVector& q_c, const Eigen::VectorXd& tau,
                               double damping) {
  const ChainFrames frames = forwardKinematics(chain, q_c);
  return estimateForceFromJacobian(linearJacobian(frames, tipPosition(frames, chain)), tau, damping);
}

void AdmittanceParams::validate() const {
  if (!(gain_alpha >= 0.0)) throw std::invalid_argument("admittance: gain_alpha must be >= 0");
  if (!(filter_beta >= 0.0 && filter_beta < 1.0)) {
    throw std::invalid_argument("admittance: filter_beta must lie in [0, 1)");
  }
  if (!(force_deadband >= 0.0)) throw std::invalid_argument("admittance: force_deadband must be >= 0");
}

Vec3 applyDeadband(const Vec3& f, double deadband) {
  const double mag = f.norm();
  if (mag <= deadband) return Vec3::Zero();
  return f * ((mag - deadband) / mag);
}

AdmittanceState admittanceUpdate(const AdmittanceState& state, const Vec3& tip, const ForceEstimate& force,
                                 double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("admittance: dt must be positive");
  }
  AdmittanceState next = state;
  const double beta = state.params.filter_beta;
  next.f_filtered = beta * state.f_filtered + (1.0 - beta) * force.f_ext;
  next.r = tip + state.params.gain_alpha * applyDeadband(next.f_filtered, state.params.force_deadband);
  return next;
}

}  // namespace trocar
