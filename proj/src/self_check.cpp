#include "trocar/self_check.hpp"

#include <algorithm>
#include <random>

namespace trocar {

namespace {

constexpr double kStep = 1e-6;

double relError(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  return (analytic - numeric).norm() / std::max(1.0, analytic.norm());
}

}  // namespace

bool SelfCheckReport::passed() const {
  if (!(jacobian_error < jacobian_tolerance)) return false;
  return std::all_of(gradient_error.begin(), gradient_error.end(),
                     [&](double e) { return e < gradient_tolerance; });
}

SelfCheckReport runSelfCheck(const KinematicChain& chain, const JointLimits& limits, int configurations,
                             std::uint64_t seed) {
  const int n = chain.dof();
  limits.validate(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto randomQ = [&] {
    JointVector q(n);
    for (int i = 0; i < n; ++i) q[i] = limits.q_min[i] + unit(rng) * (limits.q_max[i] - limits.q_min[i]);
    return q;
  };
  auto randomVec = [&](double scale) -> Vec3 {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = normal(rng);
    return scale * v;
  };

  SelfCheckReport report;
  report.configurations = configurations;
  for (int c = 0; c < configurations; ++c) {
    const JointVector q = randomQ();
    const Vec3 tip = tipPosition(chain, q);

    Eigen::MatrixXd fd_jac(3, n);
    JointVector qp = q;
    for (int j = 0; j < n; ++j) {
      qp[j] = q[j] + kStep;
      const Vec3 up = tipPosition(chain, qp);
      qp[j] = q[j] - kStep;
      const Vec3 down = tipPosition(chain, qp);
      qp[j] = q[j];
      fd_jac.col(j) = (up - down) / (2.0 * kStep);
    }
    report.jacobian_error = std::max(report.jacobian_error, relError(linearJacobian(chain, q, tip), fd_jac));

    TaskParams params;
    params.axis_anchor = tip + randomVec(0.05);
    params.insertion_axis = randomVec(1.0).normalized();
    params.goal = tip + randomVec(0.05);
    params.admittance_ref = tip + randomVec(0.01);
    params.q_prev = randomQ();

    for (int term = 1; term <= kNumTerms; ++term) {
      const JointVector grad = evaluateCost(term, q, params, chain).gradient;
      JointVector fd(n);
      for (int j = 0; j < n; ++j) {
        qp[j] = q[j] + kStep;
        const double up = evaluateCost(term, qp, params, chain).value;
        qp[j] = q[j] - kStep;
        const double down = evaluateCost(term, qp, params, chain).value;
        qp[j] = q[j];
        fd[j] = (up - down) / (2.0 * kStep);
      }
      auto& err = report.gradient_error[static_cast<std::size_t>(term - 1)];
      err = std::max(err, relError(grad, fd));
    }
  }
  return report;
}

}  // namespace trocar
