#include "trocar/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trocar {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr int kRenormalizeEvery = 16;

void requireUnit(const Vec3& v, const char* what) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument(std::string(what) + " must have unit norm");
  }
}

void requireLength(const KinematicChain& chain, const JointVector& q) {
  if (q.size() != chain.dof()) {
    throw std::invalid_argument("bad joint vector length");
  }
}

}  // namespace

void JointLimits::validate(int n) const {
  if (q_min.size() != n || q_max.size() != n || qdot_max.size() != n) {
    throw std::invalid_argument("joint limits: bad joint vector length");
  }
  for (int i = 0; i < n; ++i) {
    if (!(q_min[i] < q_max[i])) {
      throw std::invalid_argument("joint limits: q_min must be below q_max");
    }
    if (!(qdot_max[i] > 0.0)) {
      throw std::invalid_argument("joint limits: qdot_max must be positive");
    }
  }
}

KinematicChain::KinematicChain(std::vector<JointSpec> joints, Vec3 tool_tip_offset,
                               Vec3 tool_axis_local)
    : joints_(std::move(joints)),
      tool_tip_offset_(std::move(tool_tip_offset)),
      tool_axis_local_(std::move(tool_axis_local)) {
  if (joints_.empty()) {
    throw std::invalid_argument("kinematic chain needs at least one joint");
  }
  for (auto& joint : joints_) {
    requireUnit(joint.axis, "joint axis");
    const double qn = joint.orientation_offset.norm();
    if (!std::isfinite(qn) || std::abs(qn - 1.0) > 1e-9) {
      throw std::invalid_argument("joint orientation offset is not a rotation");
    }
    joint.orientation_offset.normalize();
  }
  if (!tool_tip_offset_.allFinite()) {
    throw std::invalid_argument("tool tip offset must be finite");
  }
  requireUnit(tool_axis_local_, "tool axis");
}

KinematicChain KinematicChain::withTool(const Vec3& tip_offset, const Vec3& axis_local) const {
  return KinematicChain(joints_, tip_offset, axis_local);
}

ChainFrames forwardKinematics(const KinematicChain& chain, const JointVector& q) {
  requireLength(chain, q);
  const auto n = static_cast<std::size_t>(chain.dof());

  ChainFrames out;
  out.joints.reserve(n);
  out.joint_origins.reserve(n);
  out.joint_axes.reserve(n);

  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  int multiplies = 0;

  for (std::size_t j = 0; j < n; ++j) {
    const JointSpec& joint = chain.joints()[j];
    position += rotation * joint.origin_offset;
    rotation = rotation * joint.orientation_offset;
    out.joint_origins.push_back(position);
    out.joint_axes.push_back(rotation * joint.axis);
    rotation = rotation * Eigen::Quaterniond(Eigen::AngleAxisd(q[static_cast<Eigen::Index>(j)], joint.axis));
    multiplies += 2;
    if (multiplies > kRenormalizeEvery) {
      rotation.normalize();
      multiplies = 0;
    }
    out.joints.push_back(Frame{position, rotation});
  }
  out.tool = out.joints.back();
  return out;
}

Vec3 tipPosition(const KinematicChain& chain, const JointVector& q) {
  return tipPosition(forwardKinematics(chain, q), chain);
}

Vec3 opticalAxis(const KinematicChain& chain, const JointVector& q) {
  return opticalAxis(forwardKinematics(chain, q), chain);
}

Jacobian3 linearJacobian(const ChainFrames& frames, const Vec3& point) {
  const auto n = static_cast<Eigen::Index>(frames.joint_axes.size());
  Jacobian3 jac(3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    jac.col(j) = frames.joint_axes[idx].cross(point - frames.joint_origins[idx]);
  }
  return jac;
}

Jacobian3 linearJacobian(const KinematicChain& chain, const JointVector& q, const Vec3& point) {
  return linearJacobian(forwardKinematics(chain, q), point);
}

namespace chains {

KinematicChain lbrMed7() {
  // Link lengths follow the public LBR Med 7 R800 drawing (0.34 / 0.40 /
  // 0.40 / 0.126 m between axis intersections). Joint 4 turns about -y in
  // the vendor convention; +y is used here and the limits are symmetric.
  std::vector<JointSpec> joints(7);
  const double offsets[7] = {0.1575, 0.1825, 0.2045, 0.1955, 0.2045, 0.1955, 0.081};
  const Vec3 axes[7] = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitY(),
                        Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitZ()};
  for (int i = 0; i < 7; ++i) {
    joints[static_cast<std::size_t>(i)].origin_offset = Vec3(0.0, 0.0, offsets[i]);
    joints[static_cast<std::size_t>(i)].axis = axes[i];
  }
  // Flange is 0.045 m past joint 7; the scope tip another 0.355 m.
  return KinematicChain(std::move(joints), Vec3(0.0, 0.0, 0.40), Vec3::UnitZ());
}

JointLimits lbrMed7Limits() {
  constexpr double deg = std::numbers::pi / 180.0;
  JointLimits limits;
  limits.q_max.resize(7);
  limits.qdot_max.resize(7);
  limits.q_max << 170, 120, 170, 120, 170, 120, 175;
  limits.q_max *= deg;
  limits.q_min = -limits.q_max;
  limits.qdot_max << 85, 85, 100, 75, 130, 135, 135;
  limits.qdot_max *= deg;
  return limits;
}

KinematicChain planar2() {
  std::vector<JointSpec> joints(2);
  joints[0].axis = Vec3::UnitZ();
  joints[1].origin_offset = Vec3(1.0, 0.0, 0.0);
  joints[1].axis = Vec3::UnitZ();
  return KinematicChain(std::move(joints), Vec3(1.0, 0.0, 0.0), Vec3::UnitX());
}

}  // namespace chains

}  // namespace trocar
