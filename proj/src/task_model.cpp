#include "trocar/task_model.hpp"

#include <cmath>
#include <stdexcept>

namespace trocar {

namespace {

constexpr double kDirTolerance = 1e-9;

// Shared per-configuration quantities for all terms.
struct Kinematics {
  Vec3 tip;
  Vec3 axis;
  Jacobian3 tip_jacobian;
};

Kinematics evaluateKinematics(const KinematicChain& chain, const JointVector& q, bool need_jacobian) {
  const ChainFrames frames = forwardKinematics(chain, q);
  Kinematics k;
  k.tip = tipPosition(frames, chain);
  k.axis = opticalAxis(frames, chain);
  if (need_jacobian) {
    k.tip_jacobian = linearJacobian(frames, k.tip);
  }
  return k;
}

double smoothedNorm(const Vec3& d, double eps) { return std::sqrt(d.squaredNorm() + eps * eps) - eps; }

Mat3 lineProjector(const Vec3& dir) { return Mat3::Identity() - dir * dir.transpose(); }

}  // namespace

void TaskParams::validate(int n) const {
  if (q_prev.size() != n) {
    throw std::invalid_argument("bad joint vector length");
  }
  if (!insertion_axis.allFinite() || std::abs(insertion_axis.norm() - 1.0) > kDirTolerance) {
    throw std::invalid_argument("direction not normalized");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("cost weights must be strictly positive");
    }
  }
  if (!(c5_smoothing > 0.0)) {
    throw std::invalid_argument("c5 smoothing length must be positive");
  }
  if (!axis_anchor.allFinite() || !goal.allFinite() || !admittance_ref.allFinite() || !q_prev.allFinite()) {
    throw std::invalid_argument("task parameters must be finite");
  }
}

Vec3 nearestPointOnLine(const Vec3& p, const Vec3& anchor, const Vec3& dir) {
  if (std::abs(dir.norm() - 1.0) > kDirTolerance) {
    throw std::invalid_argument("direction not normalized");
  }
  return anchor + (p - anchor).dot(dir) * dir;
}

Jacobian3 opticalAxisJacobian(const KinematicChain& chain, const JointVector& q, double h) {
  const auto n = q.size();
  Jacobian3 jac(3, n);
  JointVector qp = q;
  for (Eigen::Index j = 0; j < n; ++j) {
    qp[j] = q[j] + h;
    const Vec3 up = opticalAxis(chain, qp);
    qp[j] = q[j] - h;
    const Vec3 down = opticalAxis(chain, qp);
    qp[j] = q[j];
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

TermValue evaluateCost(int term, const JointVector& q, const TaskParams& params,
                       const KinematicChain& chain) {
  if (term < 1 || term > kNumTerms) {
    throw std::out_of_range("cost term index must be in 1..5");
  }
  if (q.size() != chain.dof()) {
    throw std::invalid_argument("bad joint vector length");
  }
  TermValue out;
  switch (static_cast<CostTerm>(term)) {
    case CostTerm::kAxisLine: {
      const auto k = evaluateKinematics(chain, q, true);
      const Vec3 r = k.tip - nearestPointOnLine(k.tip, params.axis_anchor, params.insertion_axis);
      out.value = r.squaredNorm();
      // r = P (e - anchor) with P symmetric idempotent, so dr/dq = P J.
      out.gradient = 2.0 * (lineProjector(params.insertion_axis) * k.tip_jacobian).transpose() * r;
      break;
    }
    case CostTerm::kGoal: {
      const auto k = evaluateKinematics(chain, q, true);
      const Vec3 r = k.tip - params.goal;
      out.value = r.squaredNorm();
      out.gradient = 2.0 * k.tip_jacobian.transpose() * r;
      break;
    }
    case CostTerm::kAxisAlign: {
      const Vec3 r = opticalAxis(chain, q) - params.insertion_axis;
      out.value = r.squaredNorm();
      out.gradient = 2.0 * opticalAxisJacobian(chain, q).transpose() * r;
      break;
    }
    case CostTerm::kJointMotion: {
      if (params.q_prev.size() != q.size()) {
        throw std::invalid_argument("bad joint vector length");
      }
      const JointVector r = q - params.q_prev;
      out.value = r.squaredNorm();
      out.gradient = 2.0 * r;
      break;
    }
    case CostTerm::kAdmittance: {
      const auto k = evaluateKinematics(chain, q, true);
      const Vec3 d = k.tip - params.admittance_ref;
      const double eps = params.c5_smoothing;
      const double rho = std::sqrt(d.squaredNorm() + eps * eps);
      out.value = rho - eps;
      out.gradient = k.tip_jacobian.transpose() * (d / rho);
      break;
    }
  }
  return out;
}

CostReport totalObjective(const JointVector& q, const TaskParams& params, const KinematicChain& chain) {
  const int n = chain.dof();
  if (q.size() != n) {
    throw std::invalid_argument("bad joint vector length");
  }
  const auto& w = params.weights;
  const auto& on = params.active;

  const auto k = evaluateKinematics(chain, q, true);
  const Jacobian3 axis_jac = on[2] ? opticalAxisJacobian(chain, q) : Jacobian3::Zero(3, n);

  CostReport rep;
  rep.term_gradients = Eigen::MatrixXd::Zero(kNumTerms, n);
  rep.residuals = Eigen::VectorXd::Zero(9 + n);
  rep.residual_jacobian = Eigen::MatrixXd::Zero(9 + n, n);
  rep.admittance_curvature = Eigen::MatrixXd::Zero(n, n);

  if (on[0]) {
    const Mat3 proj = lineProjector(params.insertion_axis);
    const Vec3 r = proj * (k.tip - params.axis_anchor);
    const Jacobian3 jr = proj * k.tip_jacobian;
    rep.values[0] = r.squaredNorm();
    rep.term_gradients.row(0) = 2.0 * (jr.transpose() * r).transpose();
    rep.residuals.segment<3>(0) = std::sqrt(w[0]) * r;
    rep.residual_jacobian.middleRows(0, 3) = std::sqrt(w[0]) * jr;
  }
  if (on[1]) {
    const Vec3 r = k.tip - params.goal;
    rep.values[1] = r.squaredNorm();
    rep.term_gradients.row(1) = 2.0 * (k.tip_jacobian.transpose() * r).transpose();
    rep.residuals.segment<3>(3) = std::sqrt(w[1]) * r;
    rep.residual_jacobian.middleRows(3, 3) = std::sqrt(w[1]) * k.tip_jacobian;
  }
  if (on[2]) {
    const Vec3 r = k.axis - params.insertion_axis;
    rep.values[2] = r.squaredNorm();
    rep.term_gradients.row(2) = 2.0 * (axis_jac.transpose() * r).transpose();
    rep.residuals.segment<3>(6) = std::sqrt(w[2]) * r;
    rep.residual_jacobian.middleRows(6, 3) = std::sqrt(w[2]) * axis_jac;
  }
  if (on[3]) {
    const JointVector r = q - params.q_prev;
    rep.values[3] = r.squaredNorm();
    rep.term_gradients.row(3) = 2.0 * r.transpose();
    rep.residuals.segment(9, n) = std::sqrt(w[3]) * r;
    rep.residual_jacobian.middleRows(9, n) = std::sqrt(w[3]) * Eigen::MatrixXd::Identity(n, n);
  }
  if (on[4]) {
    const Vec3 d = k.tip - params.admittance_ref;
    const double eps = params.c5_smoothing;
    const double rho = std::sqrt(d.squaredNorm() + eps * eps);
    rep.values[4] = rho - eps;
    rep.term_gradients.row(4) = (k.tip_jacobian.transpose() * (d / rho)).transpose();
    // Hessian of sqrt(|d|^2 + eps^2) w.r.t. the tip: (I - d d^T / rho^2) / rho.
    const Mat3 hess_tip = (Mat3::Identity() - d * d.transpose() / (rho * rho)) / rho;
    rep.admittance_curvature = w[4] * k.tip_jacobian.transpose() * hess_tip * k.tip_jacobian;
  }

  rep.gradient = JointVector::Zero(n);
  for (int i = 0; i < kNumTerms; ++i) {
    if (!on[static_cast<std::size_t>(i)]) continue;
    rep.total += w[static_cast<std::size_t>(i)] * rep.values[static_cast<std::size_t>(i)];
    rep.gradient += w[static_cast<std::size_t>(i)] * rep.term_gradients.row(i).transpose();
  }
  return rep;
}

double objectiveValue(const JointVector& q, const TaskParams& params, const KinematicChain& chain) {
  const auto& w = params.weights;
  const auto& on = params.active;
  const auto k = evaluateKinematics(chain, q, false);
  double total = 0.0;
  if (on[0]) {
    const Vec3 r = k.tip - nearestPointOnLine(k.tip, params.axis_anchor, params.insertion_axis);
    total += w[0] * r.squaredNorm();
  }
  if (on[1]) total += w[1] * (k.tip - params.goal).squaredNorm();
  if (on[2]) total += w[2] * (k.axis - params.insertion_axis).squaredNorm();
  if (on[3]) total += w[3] * (q - params.q_prev).squaredNorm();
  if (on[4]) total += w[4] * smoothedNorm(k.tip - params.admittance_ref, params.c5_smoothing);
  return total;
}

}  // namespace trocar
