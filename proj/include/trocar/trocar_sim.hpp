#pragma once

#include "trocar/kinematics.hpp"

#include <cstdint>
#include <random>

namespace trocar {

// Rigid ring held by a translational spring-damper to its rest pose. The
// ring is a plate of thickness wall_thickness whose entry face is the plane
// through center normal to axis; the lumen has radius inner_radius and the
// plate ends at outer_radius. axis points in the insertion direction.
struct TrocarModel {
  Vec3 rest_center = Vec3::Zero();
  Vec3 rest_axis = Vec3::UnitZ();
  double inner_radius = 0.0035;
  double outer_radius = 0.015;
  double wall_thickness = 0.005;
  double anchor_stiffness = 500.0;   // N/m
  double anchor_damping = 5.0;       // N s/m
  double contact_stiffness = 5000.0; // N/m
  double effective_mass = 0.05;      // kg

  void validate() const;
};

struct TrocarState {
  Vec3 center = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();

  static TrocarState atRest(const TrocarModel& model) { return {model.rest_center, Vec3::Zero(), model.rest_axis}; }
};

// Straight shaft ending at the tip, extending shaft_length back along -a(q).
struct EndoscopeGeometry {
  double shaft_radius = 0.002;
  double shaft_length = 0.35;

  void validate(const TrocarModel& trocar) const;
};

enum class ContactKind { kNone, kWall, kFace };

struct ContactResult {
  bool in_contact = false;
  ContactKind kind = ContactKind::kNone;
  Vec3 force_on_scope = Vec3::Zero();
  Vec3 force_on_trocar = Vec3::Zero();
  Vec3 contact_point = Vec3::Zero();
  double penetration = 0.0;
};

// Penalty contact between the shaft and the ring.
//  - wall: the shaft crosses the entry plane at radial distance d with
//    clearance < d <= outer_radius, clearance = inner_radius - shaft_radius;
//    the scope is pushed radially inward with k_c (d - clearance).
//  - face: the tip sits inside the plate slab (0 < depth <= wall_thickness)
//    but outside the lumen; the scope is pushed back along -axis with
//    k_c * depth. Takes precedence over the wall branch and stops the shaft
//    tunnelling through the plate on approach.
ContactResult computeContact(const Vec3& tip, const Vec3& scope_axis, const EndoscopeGeometry& geom,
                             const TrocarState& trocar, const TrocarModel& model);

// Implicit Euler step of the anchored ring. Dissipative for any dt.
TrocarState trocarStep(const TrocarState& state, const TrocarModel& model, const Vec3& external_force, double dt);

// Spring potential plus kinetic energy of the ring.
double trocarEnergy(const TrocarState& state, const TrocarModel& model);

// tau = J_lin(q, contact_point)^T force_on_scope; zero without contact.
Eigen::VectorXd jointExternalTorques(const KinematicChain& chain, const JointVector& q, const ContactResult& contact);

struct NoiseModel {
  double sigma_pos = 0.001;    // m
  double sigma_axis = 0.0087;  // rad
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrocarPose {
  Vec3 center;
  Vec3 axis;
};

using NoiseRng = std::mt19937_64;

// Gaussian position noise per coordinate; the axis is tilted by |N(0, s^2)|
// about a uniformly drawn perpendicular. Consumes a fixed number of draws
// per call, so streams stay aligned when sigmas are zero.
TrocarPose measureTrocarPose(const TrocarState& state, const NoiseModel& noise, NoiseRng& rng);

struct SimSettings {
  double dt = 0.005;
  double substep = 0.001;
  double insertion_depth = 0.02;
  // First-order tracking lag of the joint servo; 0 means exact tracking.
  double tracking_time_constant = 0.0;

  void validate() const;
};

struct Observation {
  JointVector q_c;
  Eigen::VectorXd tau_ext;
  TrocarPose measured;
  ContactResult contact;
  double force_norm = 0.0;  // true |f_ext| on the scope
  Vec3 tip = Vec3::Zero();
  double insertion = 0.0;   // tip depth past the entry plane, m
  double radial = 0.0;      // tip distance from the true axis, m
  bool success = false;
};

// Closed-loop testbed: the robot tracks commanded joint positions, the ring
// responds to contact and the controller sees noisy ring poses plus the
// joint torques the contact induces.
class DockingSim {
 public:
  DockingSim(KinematicChain chain, JointLimits limits, EndoscopeGeometry geom, TrocarModel trocar,
             NoiseModel noise, SimSettings settings, JointVector q0);

  // Observation of the current state; draws a fresh pose measurement.
  Observation observe();

  // Advance one control period towards q_command.
  Observation step(const JointVector& q_command);

  const KinematicChain& chain() const { return chain_; }
  const TrocarState& trocarState() const { return trocar_state_; }
  const TrocarModel& trocarModel() const { return trocar_; }
  const JointVector& q() const { return q_; }
  double time() const { return time_; }

 private:
  Observation makeObservation(const ContactResult& contact);

  KinematicChain chain_;
  JointLimits limits_;
  EndoscopeGeometry geom_;
  TrocarModel trocar_;
  NoiseModel noise_;
  SimSettings settings_;
  NoiseRng rng_;
  JointVector q_;
  TrocarState trocar_state_;
  double time_ = 0.0;
};

}  // namespace trocar
