#include "trocar/trocar_sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trocar {

namespace {

bool isUnit(const Vec3& v) { return v.allFinite() && std::abs(v.norm() - 1.0) <= 1e-9; }

}  // namespace

void TrocarModel::validate() const {
  if (!isUnit(rest_axis)) throw std::invalid_argument("trocar: rest_axis must be a unit vector");
  if (!rest_center.allFinite()) throw std::invalid_argument("trocar: rest_center must be finite");
  if (!(inner_radius > 0.0)) throw std::invalid_argument("trocar: inner_radius must be positive");
  if (!(outer_radius > inner_radius)) throw std::invalid_argument("trocar: outer_radius must exceed inner_radius");
  if (!(wall_thickness > 0.0)) throw std::invalid_argument("trocar: wall_thickness must be positive");
  if (!(anchor_stiffness > 0.0) || !(contact_stiffness > 0.0)) {
    throw std::invalid_argument("trocar: stiffnesses must be positive");
  }
  if (!(anchor_damping >= 0.0)) throw std::invalid_argument("trocar: anchor_damping must be >= 0");
  if (!(effective_mass > 0.0)) throw std::invalid_argument("trocar: effective_mass must be positive");
}

void EndoscopeGeometry::validate(const TrocarModel& trocar) const {
  if (!(shaft_radius > 0.0) || !(shaft_radius < trocar.inner_radius)) {
    throw std::invalid_argument("endoscope: shaft_radius must lie in (0, trocar inner_radius)");
  }
  if (!(shaft_length > 0.0)) throw std::invalid_argument("endoscope: shaft_length must be positive");
}

void NoiseModel::validate() const {
  if (!(sigma_pos >= 0.0) || !(sigma_axis >= 0.0)) throw std::invalid_argument("noise: sigmas must be >= 0");
}

void SimSettings::validate() const {
  if (!(dt > 0.0) || !(substep > 0.0) || substep > dt) {
    throw std::invalid_argument("sim: need 0 < substep <= dt");
  }
  if (!(insertion_depth > 0.0)) throw std::invalid_argument("sim: insertion_depth must be positive");
  if (!(tracking_time_constant >= 0.0)) throw std::invalid_argument("sim: tracking_time_constant must be >= 0");
}

ContactResult computeContact(const Vec3& tip, const Vec3& scope_axis, const EndoscopeGeometry& geom,
                             const TrocarState& trocar, const TrocarModel& model) {
  ContactResult out;
  const Vec3& n = trocar.axis;
  const double clearance = model.inner_radius - geom.shaft_radius;
  const double k_c = model.contact_stiffness;

  const Vec3 rel_tip = tip - trocar.center;
  const double depth = rel_tip.dot(n);
  const double tip_radial = (rel_tip - depth * n).norm();

  if (depth > 0.0 && depth <= model.wall_thickness && tip_radial > clearance &&
      tip_radial < model.outer_radius + geom.shaft_radius) {
    out.in_contact = true;
    out.kind = ContactKind::kFace;
    out.penetration = depth;
    out.contact_point = tip;
    out.force_on_scope = -k_c * depth * n;
    out.force_on_trocar = -out.force_on_scope;
    return out;
  }

  const double along = scope_axis.dot(n);
  if (along <= 1e-12 || depth < 0.0) {
    return out;
  }
  const double s = depth / along;  // distance back from the tip to the plane
  if (s > geom.shaft_length) {
    return out;
  }
  const Vec3 crossing = tip - s * scope_axis;
  Vec3 radial = crossing - trocar.center;
  radial -= radial.dot(n) * n;
  const double d = radial.norm();
  if (d <= clearance || d > model.outer_radius) {
    return out;
  }
  out.in_contact = true;
  out.kind = ContactKind::kWall;
  out.penetration = d - clearance;
  out.contact_point = crossing;
  out.force_on_scope = -k_c * out.penetration * (radial / d);
  out.force_on_trocar = -out.force_on_scope;
  return out;
}

TrocarState trocarStep(const TrocarState& state, const TrocarModel& model, const Vec3& external_force, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("trocar step: dt must be positive");
  const double m = model.effective_mass;
  const double k = model.anchor_stiffness;
  const double b = model.anchor_damping;
  const Vec3 x = state.center - model.rest_center;

  // v' = v + dt/m (F - k x' - b v'),  x' = x + dt v'
  TrocarState next = state;
  next.velocity = (m * state.velocity + dt * (external_force - k * x)) / (m + dt * b + dt * dt * k);
  next.center = model.rest_center + x + dt * next.velocity;
  return next;
}

double trocarEnergy(const TrocarState& state, const TrocarModel& model) {
  return 0.5 * model.anchor_stiffness * (state.center - model.rest_center).squaredNorm() +
         0.5 * model.effective_mass * state.velocity.squaredNorm();
}

Eigen::VectorXd jointExternalTorques(const KinematicChain& chain, const JointVector& q, const ContactResult& contact) {
  if (!contact.in_contact) {
    if (q.size() != chain.dof()) throw std::invalid_argument("bad joint vector length");
    return Eigen::VectorXd::Zero(chain.dof());
  }
  return linearJacobian(chain, q, contact.contact_point).transpose() * contact.force_on_scope;
}

TrocarPose measureTrocarPose(const TrocarState& state, const NoiseModel& noise, NoiseRng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);

  TrocarPose pose;
  const double nx = normal(rng);
  const double ny = normal(rng);
  const double nz = normal(rng);
  pose.center = state.center + noise.sigma_pos * Vec3(nx, ny, nz);

  const double tilt = std::abs(noise.sigma_axis * normal(rng));
  const double phi = uniform(rng);
  const Vec3 u = state.axis.unitOrthogonal();
  const Vec3 v = state.axis.cross(u);
  const Vec3 perp = std::cos(phi) * u + std::sin(phi) * v;
  pose.axis = (std::cos(tilt) * state.axis + std::sin(tilt) * perp).normalized();
  return pose;
}

DockingSim::DockingSim(KinematicChain chain, JointLimits limits, EndoscopeGeometry geom, TrocarModel trocar,
                       NoiseModel noise, SimSettings settings, JointVector q0)
    : chain_(std::move(chain)),
      limits_(std::move(limits)),
      geom_(geom),
      trocar_(trocar),
      noise_(noise),
      settings_(settings),
      rng_(noise.seed),
      q_(std::move(q0)),
      trocar_state_(TrocarState::atRest(trocar)) {
  limits_.validate(chain_.dof());
  trocar_.validate();
  geom_.validate(trocar_);
  noise_.validate();
  settings_.validate();
  if (q_.size() != chain_.dof()) throw std::invalid_argument("bad joint vector length");
}

Observation DockingSim::makeObservation(const ContactResult& contact) {
  Observation obs;
  obs.q_c = q_;
  obs.contact = contact;
  obs.tau_ext = jointExternalTorques(chain_, q_, contact);
  obs.force_norm = contact.force_on_scope.norm();
  obs.measured = measureTrocarPose(trocar_state_, noise_, rng_);

  obs.tip = tipPosition(chain_, q_);
  const Vec3 rel = obs.tip - trocar_state_.center;
  obs.insertion = rel.dot(trocar_state_.axis);
  obs.radial = (rel - obs.insertion * trocar_state_.axis).norm();
  const double clearance = trocar_.inner_radius - geom_.shaft_radius;
  obs.success = obs.insertion >= settings_.insertion_depth && obs.radial < clearance;
  return obs;
}

Observation DockingSim::observe() {
  const ChainFrames frames = forwardKinematics(chain_, q_);
  const ContactResult contact =
      computeContact(tipPosition(frames, chain_), opticalAxis(frames, chain_), geom_, trocar_state_, trocar_);
  return makeObservation(contact);
}

Observation DockingSim::step(const JointVector& q_command) {
  if (q_command.size() != chain_.dof()) throw std::invalid_argument("bad joint vector length");
  constexpr double kLimitSlack = 1e-12;
  if (!q_command.allFinite() || (q_command.array() < limits_.q_min.array() - kLimitSlack).any() ||
      (q_command.array() > limits_.q_max.array() + kLimitSlack).any()) {
    throw std::runtime_error("infeasible command");
  }

  const int substeps = std::max(1, static_cast<int>(std::lround(settings_.dt / settings_.substep)));
  const double h = settings_.dt / substeps;
  const JointVector q_start = q_;
  const double lag =
      settings_.tracking_time_constant > 0.0 ? 1.0 - std::exp(-h / settings_.tracking_time_constant) : 1.0;

  ContactResult contact;
  for (int k = 1; k <= substeps; ++k) {
    if (settings_.tracking_time_constant > 0.0) {
      q_ += lag * (q_command - q_);
    } else {
      q_ = q_start + (static_cast<double>(k) / substeps) * (q_command - q_start);
    }
    const ChainFrames frames = forwardKinematics(chain_, q_);
    contact = computeContact(tipPosition(frames, chain_), opticalAxis(frames, chain_), geom_, trocar_state_, trocar_);
    trocar_state_ = trocarStep(trocar_state_, trocar_, contact.force_on_trocar, h);
  }
  if (settings_.tracking_time_constant <= 0.0) q_ = q_command;
  time_ += settings_.dt;
  return makeObservation(contact);
}

}  // namespace trocar
