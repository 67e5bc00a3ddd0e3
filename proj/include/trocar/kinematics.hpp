#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

namespace trocar {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using JointVector = Eigen::VectorXd;
using Jacobian3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;

// One revolute joint. The joint frame is the parent frame translated by
// origin_offset, rotated by orientation_offset, then rotated about axis by q.
struct JointSpec {
  Vec3 origin_offset = Vec3::Zero();
  Eigen::Quaterniond orientation_offset = Eigen::Quaterniond::Identity();
  Vec3 axis = Vec3::UnitZ();
};

struct Frame {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  Mat3 rotationMatrix() const { return rotation.toRotationMatrix(); }
};

// Frames produced by forward kinematics. joint_origins[j] and joint_axes[j]
// are the world-frame pivot and rotation axis of joint j; they feed the
// geometric Jacobian.
struct ChainFrames {
  std::vector<Frame> joints;
  std::vector<Vec3> joint_origins;
  std::vector<Vec3> joint_axes;
  Frame tool;
};

struct JointLimits {
  JointVector q_min;
  JointVector q_max;
  JointVector qdot_max;

  void validate(int n) const;
};

// Serial chain of revolute joints ending in an endoscope. The tool frame
// is the last joint frame; the tip sits at tool_tip_offset and the optical
// axis is tool_axis_local, both expressed in that frame.
class KinematicChain {
 public:
  KinematicChain(std::vector<JointSpec> joints, Vec3 tool_tip_offset, Vec3 tool_axis_local);

  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const Vec3& toolTipOffset() const { return tool_tip_offset_; }
  const Vec3& toolAxisLocal() const { return tool_axis_local_; }

  // Returns a copy with a different endoscope geometry.
  KinematicChain withTool(const Vec3& tip_offset, const Vec3& axis_local) const;

 private:
  std::vector<JointSpec> joints_;
  Vec3 tool_tip_offset_;
  Vec3 tool_axis_local_;
};

ChainFrames forwardKinematics(const KinematicChain& chain, const JointVector& q);

Vec3 tipPosition(const KinematicChain& chain, const JointVector& q);

Vec3 opticalAxis(const KinematicChain& chain, const JointVector& q);

// 3 x n linear geometric Jacobian of a point rigidly attached to the tool,
// given in the base frame.
Jacobian3 linearJacobian(const KinematicChain& chain, const JointVector& q, const Vec3& point);

// Same, reusing frames already computed for q.
Jacobian3 linearJacobian(const ChainFrames& frames, const Vec3& point);

inline Vec3 tipPosition(const ChainFrames& frames, const KinematicChain& chain) {
  return frames.tool.position + frames.tool.rotation * chain.toolTipOffset();
}

inline Vec3 opticalAxis(const ChainFrames& frames, const KinematicChain& chain) {
  return (frames.tool.rotation * chain.toolAxisLocal()).normalized();
}

namespace chains {

// 7-DOF arm with nominal link lengths resembling a KUKA LBR Med 7 R800 and
// a straight endoscope 0.40 m past the flange. The values are nominal.
KinematicChain lbrMed7();
JointLimits lbrMed7Limits();

// Two unit links in the xy-plane, both rotating about z. Tool tip at the
// end of the second link, optical axis along the link.
KinematicChain planar2();

}  // namespace chains

}  // namespace trocar
