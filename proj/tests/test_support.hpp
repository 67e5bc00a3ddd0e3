#pragma once

#include "trocar/kinematics.hpp"

#include <cmath>
#include <random>

namespace trocar::testing {

inline Vec3 randomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-3);
  return v.normalized();
}

// Chain with random offsets, orientations and axes; 1..max_dof joints.
inline KinematicChain randomChain(std::mt19937_64& rng, int min_dof = 1, int max_dof = 7) {
  std::uniform_int_distribution<int> count(min_dof, max_dof);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  const int n = count(rng);
  std::vector<JointSpec> joints(static_cast<std::size_t>(n));
  for (auto& j : joints) {
    j.origin_offset = Vec3(u(rng), u(rng), u(rng));
    j.orientation_offset = Eigen::Quaterniond(Eigen::AngleAxisd(angle(rng), randomUnit(rng)));
    j.axis = randomUnit(rng);
  }
  return KinematicChain(std::move(joints), Vec3(u(rng), u(rng), 0.2 + u(rng)), randomUnit(rng));
}

inline JointVector randomQ(std::mt19937_64& rng, int n, double range = M_PI) {
  std::uniform_real_distribution<double> u(-range, range);
  JointVector q(n);
  for (int i = 0; i < n; ++i) q[i] = u(rng);
  return q;
}

// Rotation about a unit axis by Rodrigues' formula, as a 4x4 transform.
inline Eigen::Matrix4d rodrigues(const Vec3& k, double theta) {
  Mat3 K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.topLeftCorner<3, 3>() = Mat3::Identity() + std::sin(theta) * K + (1.0 - std::cos(theta)) * K * K;
  return T;
}

inline Eigen::Matrix4d translation(const Vec3& p) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.topRightCorner<3, 1>() = p;
  return T;
}

// Independent forward kinematics: product of 4x4 homogeneous transforms.
inline Eigen::Matrix4d homogeneousToolTransform(const KinematicChain& chain, const JointVector& q) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (int j = 0; j < chain.dof(); ++j) {
    const JointSpec& js = chain.joints()[static_cast<std::size_t>(j)];
    Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
    R.topLeftCorner<3, 3>() = js.orientation_offset.toRotationMatrix();
    T = T * translation(js.origin_offset) * R * rodrigues(js.axis, q[j]);
  }
  return T;
}

inline Eigen::MatrixXd finiteDifferenceTipJacobian(const KinematicChain& chain, const JointVector& q,
                                                   double h = 1e-6) {
  Eigen::MatrixXd J(3, q.size());
  JointVector qp = q;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    qp[j] = q[j] + h;
    const Vec3 up = tipPosition(chain, qp);
    qp[j] = q[j] - h;
    const Vec3 down = tipPosition(chain, qp);
    qp[j] = q[j];
    J.col(j) = (up - down) / (2.0 * h);
  }
  return J;
}

}  // namespace trocar::testing
