#include "trocar/force_pipeline.hpp"
#include "trocar/trocar_sim.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

namespace trocar {
namespace {

using testing::randomUnit;

KinematicChain oneJointArm(double radius, const Vec3& tool_axis) {
  std::vector<JointSpec> joints(1);
  return KinematicChain(joints, Vec3(radius, 0, 0), tool_axis);
}

JointLimits oneJointLimits(double q_range, double qdot) {
  JointLimits l;
  l.q_min = JointVector::Constant(1, -q_range);
  l.q_max = JointVector::Constant(1, q_range);
  l.qdot_max = JointVector::Constant(1, qdot);
  return l;
}

bool sameBits(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

TEST(Contact, CenteredShaftHasNoContact) {
  TrocarModel m;
  const auto s = TrocarState::atRest(m);
  const auto c = computeContact(Vec3(0, 0, 0.01), Vec3::UnitZ(), EndoscopeGeometry{}, s, m);
  EXPECT_FALSE(c.in_contact);
  EXPECT_EQ(c.force_on_scope, Vec3::Zero());
  EXPECT_EQ(c.force_on_trocar, Vec3::Zero());
}

TEST(Contact, WallContactOneMillimetreBeyondClearance) {
  TrocarModel m;
  const EndoscopeGeometry g;
  const auto s = TrocarState::atRest(m);
  const double clearance = m.inner_radius - g.shaft_radius;
  // Shaft parallel to the axis, 1 cm past the entry plane, offset along +x.
  const auto c = computeContact(Vec3(clearance + 0.001, 0, 0.01), Vec3::UnitZ(), g, s, m);
  ASSERT_TRUE(c.in_contact);
  EXPECT_EQ(c.kind, ContactKind::kWall);
  EXPECT_NEAR(c.force_on_scope.norm(), 5.0, 1e-9);
  EXPECT_NEAR((c.force_on_scope.normalized() - Vec3(-1, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(c.penetration, 0.001, 1e-15);
  EXPECT_NEAR(c.contact_point.z(), 0.0, 1e-15);
}

TEST(Contact, FaceContactPushesBackAlongAxis) {
  TrocarModel m;
  const auto s = TrocarState::atRest(m);
  const auto c = computeContact(Vec3(0.008, 0, 0.002), Vec3::UnitZ(), EndoscopeGeometry{}, s, m);
  ASSERT_TRUE(c.in_contact);
  EXPECT_EQ(c.kind, ContactKind::kFace);
  EXPECT_NEAR((c.force_on_scope - Vec3(0, 0, -m.contact_stiffness * 0.002)).norm(), 0.0, 1e-12);
}

TEST(Contact, ShaftOutsideThePlateIsFree) {
  TrocarModel m;
  const auto s = TrocarState::atRest(m);
  EXPECT_FALSE(computeContact(Vec3(0.05, 0, 0.01), Vec3::UnitZ(), EndoscopeGeometry{}, s, m).in_contact);
  EXPECT_FALSE(computeContact(Vec3(0.008, 0, -0.01), Vec3::UnitZ(), EndoscopeGeometry{}, s, m).in_contact);
}

TEST(Contact, ActionReactionIsExact) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  TrocarModel m;
  m.rest_center = Vec3(0.1, -0.2, 0.3);
  m.rest_axis = randomUnit(rng);
  const auto s = TrocarState::atRest(m);
  int contacts = 0;
  for (int k = 0; k < 20000; ++k) {
    const Vec3 tip = m.rest_center + Vec3(u(rng), u(rng), u(rng));
    const Vec3 axis = (m.rest_axis + 0.3 * randomUnit(rng)).normalized();
    const auto c = computeContact(tip, axis, EndoscopeGeometry{}, s, m);
    const Vec3 sum = c.force_on_scope + c.force_on_trocar;
    EXPECT_EQ(sum, Vec3::Zero());
    EXPECT_GE(c.penetration, 0.0);
    if (c.in_contact) ++contacts;
    else EXPECT_EQ(c.force_on_scope, Vec3::Zero());
  }
  EXPECT_GT(contacts, 100);
}

TEST(Contact, NoTunnellingWhenSweepingIntoThePlate) {
  // Tip moving at 0.2 m/s sampled every 1 ms substep; any crossing of the
  // entry plane over the plate must register a contact at the end pose.
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> radius(0.0, 0.02);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  TrocarModel m;
  const EndoscopeGeometry g;
  const auto s = TrocarState::atRest(m);
  const double clearance = m.inner_radius - g.shaft_radius;
  const double speed = 0.2, h = 0.001;
  int crossings = 0;
  for (int k = 0; k < 500; ++k) {
    const double r = radius(rng), phi = angle(rng);
    const Vec3 dir = (Vec3::UnitZ() + 0.3 * randomUnit(rng)).normalized();
    if (dir.z() < 0.3) continue;
    const Vec3 cross_point(r * std::cos(phi), r * std::sin(phi), 0.0);
    Vec3 tip = cross_point - 0.01 * dir;
    for (int i = 0; i < 200; ++i) {
      const Vec3 next = tip + speed * h * dir;
      if (tip.z() <= 0.0 && next.z() > 0.0) {
        const Vec3 hit = tip + (-tip.z() / (next.z() - tip.z())) * (next - tip);
        const double d = hit.head<2>().norm();
        if (d > clearance && d <= m.outer_radius) {
          ++crossings;
          EXPECT_TRUE(computeContact(next, dir, g, s, m).in_contact) << "r=" << r;
        }
      }
      tip = next;
    }
  }
  EXPECT_GT(crossings, 100);
}

TEST(TrocarDynamics, RestStateIsEquilibrium) {
  TrocarModel m;
  m.rest_center = Vec3(0.3, 0.1, -0.2);
  const auto s0 = TrocarState::atRest(m);
  const auto s1 = trocarStep(s0, m, Vec3::Zero(), 0.001);
  EXPECT_EQ(s1.center, s0.center);
  EXPECT_EQ(s1.velocity, Vec3::Zero());
}

TEST(TrocarDynamics, ConstantForceSettlesAtSpringDeflection) {
  TrocarModel m;
  const Vec3 F(1.5, -0.5, 2.0);
  auto s = TrocarState::atRest(m);
  for (int k = 0; k < 5000; ++k) s = trocarStep(s, m, F, 0.001);
  EXPECT_LE((s.center - m.rest_center - F / m.anchor_stiffness).norm(), 1e-6);
}

TEST(TrocarDynamics, UnforcedEnergyNeverIncreases) {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (double dt : {1e-4, 1e-3, 5e-3, 0.1}) {
    for (double damping : {0.0, 5.0}) {
      TrocarModel m;
      m.anchor_damping = damping;
      TrocarState s = TrocarState::atRest(m);
      s.center += Vec3(u(rng), u(rng), u(rng));
      s.velocity = Vec3(u(rng), u(rng), u(rng)) * 10.0;
      double e = trocarEnergy(s, m);
      for (int k = 0; k < 2000; ++k) {
        s = trocarStep(s, m, Vec3::Zero(), dt);
        const double e_next = trocarEnergy(s, m);
        EXPECT_LE(e_next, e * (1.0 + 1e-12) + 1e-300);
        e = e_next;
      }
    }
  }
}

TEST(Torques, NoContactGivesZero) {
  const auto chain = chains::lbrMed7();
  EXPECT_EQ(jointExternalTorques(chain, JointVector::Zero(7), ContactResult{}), Eigen::VectorXd::Zero(7));
}

TEST(Torques, OneJointCrossProduct) {
  ContactResult c;
  c.in_contact = true;
  c.contact_point = Vec3(1, 0, 0);
  c.force_on_scope = Vec3(0, 1, 0);
  const auto tau = jointExternalTorques(oneJointArm(1.0, Vec3::UnitY()), JointVector::Zero(1), c);
  ASSERT_EQ(tau.size(), 1);
  EXPECT_NEAR(tau[0], 1.0, 1e-15);
}

TEST(Torques, TipContactRoundTripsThroughEstimator) {
  const auto chain = chains::lbrMed7();
  std::mt19937_64 rng(74);
  ContactResult c;
  c.in_contact = true;
  const JointVector q = testing::randomQ(rng, 7, 1.0);
  c.contact_point = tipPosition(chain, q);
  c.force_on_scope = Vec3(2.0, -1.0, 0.5);
  const auto est = estimateTipForce(chain, q, jointExternalTorques(chain, q, c), 0.0);
  EXPECT_LE((est.f_ext - c.force_on_scope).norm(), 1e-8);
}

TEST(Noise, ZeroSigmaIsExact) {
  TrocarModel m;
  m.rest_axis = Vec3(0, 0.6, 0.8);
  const auto s = TrocarState::atRest(m);
  NoiseModel n{0.0, 0.0, 5};
  NoiseRng rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto p = measureTrocarPose(s, n, rng);
    EXPECT_EQ(p.center, s.center);
    EXPECT_NEAR((p.axis - s.axis).norm(), 0.0, 1e-15);
  }
}

TEST(Noise, SameSeedSameSequence) {
  TrocarModel m;
  const auto s = TrocarState::atRest(m);
  NoiseModel n;
  NoiseRng a(99), b(99);
  for (int k = 0; k < 100; ++k) {
    const auto pa = measureTrocarPose(s, n, a);
    const auto pb = measureTrocarPose(s, n, b);
    EXPECT_EQ(pa.center, pb.center);
    EXPECT_EQ(pa.axis, pb.axis);
  }
}

TEST(Noise, SampleMeanAndTiltAreConsistent) {
  TrocarModel m;
  m.rest_center = Vec3(0.2, 0.1, 0.4);
  const auto s = TrocarState::atRest(m);
  NoiseModel n;
  NoiseRng rng(7);
  const int N = 10000;
  Vec3 sum = Vec3::Zero();
  double tilt_sq = 0.0;
  for (int k = 0; k < N; ++k) {
    const auto p = measureTrocarPose(s, n, rng);
    sum += p.center;
    EXPECT_NEAR(p.axis.norm(), 1.0, 1e-12);
    const double tilt = std::acos(std::clamp(p.axis.dot(s.axis), -1.0, 1.0));
    tilt_sq += tilt * tilt;
  }
  const Vec3 mean = sum / N;
  for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(mean[i] - s.center[i]), 4.0 * n.sigma_pos / std::sqrt(N));
  // |N(0, s^2)| has second moment s^2.
  EXPECT_NEAR(std::sqrt(tilt_sq / N), n.sigma_axis, 0.05 * n.sigma_axis);
}

// Trocar on a 100 m circle traced by a single joint: over a few centimetres
// the tip path deviates from the straight axis by about 1e-5 m, far inside
// the 1.5 mm clearance.
struct CircleScene {
  static constexpr double R = 100.0;
  KinematicChain chain = oneJointArm(R, Vec3::UnitY());
  JointLimits limits = oneJointLimits(0.01, 1.0);
  TrocarModel trocar;
  CircleScene() {
    trocar.rest_center = Vec3(R, 0, 0);
    trocar.rest_axis = Vec3::UnitY();
  }
  DockingSim make(double start_before_plane, NoiseModel noise = {}) const {
    return DockingSim(chain, limits, EndoscopeGeometry{}, trocar, noise, SimSettings{},
                      JointVector::Constant(1, -start_before_plane / R));
  }
};

TEST(DockingSim, StraightInsertionSucceedsWithoutForce) {
  const CircleScene scene;
  auto sim = scene.make(0.03);
  JointVector q = sim.q();
  bool success = false;
  for (int k = 0; k < 200 && !success; ++k) {
    q[0] += 0.001 / CircleScene::R;  // 1 mm per 5 ms cycle
    const auto obs = sim.step(q);
    EXPECT_FALSE(obs.contact.in_contact);
    EXPECT_EQ(obs.force_norm, 0.0);
    EXPECT_EQ(obs.tau_ext.norm(), 0.0);
    success = obs.success;
  }
  EXPECT_TRUE(success);
  EXPECT_EQ(sim.trocarState().center, scene.trocar.rest_center);
}

TEST(DockingSim, FarRobotSeesNoTorques) {
  const CircleScene scene;
  auto sim = scene.make(0.5);
  const auto obs = sim.step(sim.q());
  EXPECT_FALSE(obs.success);
  EXPECT_EQ(obs.tau_ext, Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(sim.time(), 0.005, 1e-15);
}

TEST(DockingSim, RejectsInfeasibleCommand) {
  const CircleScene scene;
  auto sim = scene.make(0.03);
  try {
    sim.step(JointVector::Constant(1, 0.5));
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "infeasible command");
  }
}

TEST(DockingSim, ContactPushesTheRing) {
  // Approach offset by 3 mm so the shaft lands on the plate face.
  CircleScene scene;
  scene.trocar.rest_center.x() += 0.005;
  auto sim = scene.make(0.01);
  JointVector q = sim.q();
  bool touched = false;
  for (int k = 0; k < 20; ++k) {
    q[0] += 0.001 / CircleScene::R;
    const auto obs = sim.step(q);
    if (obs.contact.in_contact) {
      touched = true;
      EXPECT_GT(obs.force_norm, 0.0);
      EXPECT_GT(obs.tau_ext.norm(), 0.0);
    }
  }
  EXPECT_TRUE(touched);
  EXPECT_GT((sim.trocarState().center - scene.trocar.rest_center).norm(), 0.0);
}

TEST(DockingSim, ReplayIsDeterministic) {
  CircleScene scene;
  scene.trocar.rest_center.x() += 0.004;
  auto a = scene.make(0.01, NoiseModel{0.001, 0.01, 17});
  auto b = scene.make(0.01, NoiseModel{0.001, 0.01, 17});
  JointVector q = a.q();
  for (int k = 0; k < 40; ++k) {
    q[0] += 0.0005 / CircleScene::R;
    const auto oa = a.step(q);
    const auto ob = b.step(q);
    EXPECT_TRUE(sameBits(oa.tau_ext, ob.tau_ext));
    EXPECT_EQ(oa.measured.center, ob.measured.center);
    EXPECT_EQ(oa.measured.axis, ob.measured.axis);
    EXPECT_EQ(oa.force_norm, ob.force_norm);
  }
  EXPECT_EQ(a.trocarState().center, b.trocarState().center);
}

TEST(DockingSim, TrackingLagApproachesCommand) {
  const CircleScene scene;
  SimSettings settings;
  settings.tracking_time_constant = 0.01;
  DockingSim sim(scene.chain, scene.limits, EndoscopeGeometry{}, scene.trocar, NoiseModel{}, settings,
                 JointVector::Zero(1));
  const JointVector target = JointVector::Constant(1, 1e-4);
  sim.step(target);
  EXPECT_GT(sim.q()[0], 0.0);
  EXPECT_LT(sim.q()[0], target[0]);
  for (int k = 0; k < 100; ++k) sim.step(target);
  EXPECT_NEAR(sim.q()[0], target[0], 1e-12);
}

TEST(Models, ValidateParameters) {
  TrocarModel m;
  EXPECT_NO_THROW(m.validate());
  m.outer_radius = m.inner_radius;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = TrocarModel{};
  m.rest_axis = Vec3(0, 0, 2);
  EXPECT_THROW(m.validate(), std::invalid_argument);
  EndoscopeGeometry g;
  g.shaft_radius = 0.004;
  EXPECT_THROW(g.validate(TrocarModel{}), std::invalid_argument);
  NoiseModel n;
  n.sigma_pos = -1.0;
  EXPECT_THROW(n.validate(), std::invalid_argument);
  SimSettings s;
  s.substep = 0.01;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace trocar
