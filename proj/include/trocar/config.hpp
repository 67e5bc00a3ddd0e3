#pragma once

#include "trocar/force_pipeline.hpp"
#include "trocar/kinematics.hpp"
#include "trocar/solver.hpp"
#include "trocar/task_model.hpp"
#include "trocar/trocar_sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace trocar {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ring placement relative to the initial endoscope pose: the rest center
// sits approach_distance ahead of the tip and lateral_offset to the side,
// and the ring axis is the optical axis tilted by angular_offset.
struct RelativePlacement {
  double approach_distance = 0.05;
  double lateral_offset = 0.005;
  double angular_offset = 0.17453292519943295;  // 10 deg
};

// Nominal start pose for the built-in 7-DOF arm; 0.3 rad per joint otherwise.
JointVector defaultInitialQ(int n);

struct TrialConfig {
  KinematicChain chain = chains::lbrMed7();
  JointLimits limits = chains::lbrMed7Limits();
  JointVector initial_q = defaultInitialQ(7);

  TrocarModel trocar;
  std::optional<RelativePlacement> placement = RelativePlacement{};
  EndoscopeGeometry endoscope;
  NoiseModel noise;
  SolverSettings solver;

  // Scene defaults. c4 damps the per-cycle motion and the c5 smoothing
  // length makes c5 act as a spring towards r over the admittance range.
  Weights weights = {20.0, 10.0, 10.0, 50.0, 3.0};
  double epsilon_c5 = 0.02;
  bool ff_enabled = true;

  AdmittanceParams admittance;
  double estimator_damping = 1e-6;

  SimSettings sim;
  // Depth of the goal point past the entry plane. Kept beyond insertion_depth:
  // a goal exactly at the success depth is only approached asymptotically.
  double goal_depth = 0.025;
  double t_max = 30.0;
  std::uint64_t seed = 1;

  double goalDepth() const { return goal_depth; }

  // Throws ConfigError on any violated invariant.
  void validate() const;

  // Ring rest pose after resolving the relative placement, if any.
  TrocarModel resolvedTrocar() const;
};

TrialConfig defaultTrialConfig();

// Sections: chain, limits, initial_q, trocar, endoscope, noise, solver,
// weights, admittance, sim. Missing sections keep their defaults; unknown
// keys are rejected.
TrialConfig configFromJson(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
TrialConfig loadConfigFile(const std::filesystem::path& path);
nlohmann::json configToJson(const TrialConfig& config);

}  // namespace trocar
