#include "trocar/config.hpp"

#include "trocar/chain_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace trocar {

namespace {

using nlohmann::json;

void allowKeys(const json& section, const char* name, std::initializer_list<const char*> keys) {
  if (!section.is_object()) throw ConfigError(std::string("config: section '") + name + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : section.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(std::string("config: unknown key '") + key + "' in section '" + name + "'");
    }
  }
}

template <typename T>
void read(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

Eigen::VectorXd vec(const json& j) {
  if (!j.is_array()) throw ConfigError("config: expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Vec3 vec3(const json& j) {
  const Eigen::VectorXd v = vec(j);
  if (v.size() != 3) throw ConfigError("config: expected a 3-vector");
  return v;
}

json arr(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

JointVector defaultInitialQ(int n) {
  if (n == 7) {
    JointVector q(7);
    q << 0.0, 0.6, 0.0, -1.5, 0.0, -0.6, 0.0;
    return q;
  }
  return JointVector::Constant(n, 0.3);
}

TrialConfig defaultTrialConfig() { return TrialConfig{}; }

void TrialConfig::validate() const {
  try {
    const int n = chain.dof();
    limits.validate(n);
    if (initial_q.size() != n) throw ConfigError("config: initial_q has the wrong length");
    if ((initial_q.array() < limits.q_min.array()).any() || (initial_q.array() > limits.q_max.array()).any()) {
      throw ConfigError("config: initial_q outside joint limits");
    }
    const TrocarModel t = resolvedTrocar();
    t.validate();
    endoscope.validate(t);
    noise.validate();
    solver.validate();
    admittance.validate();
    sim.validate();
    for (double w : weights) {
      if (!(w > 0.0)) throw ConfigError("config: weights must be strictly positive");
    }
    if (!(epsilon_c5 > 0.0)) throw ConfigError("config: epsilon_c5 must be positive");
    if (!(estimator_damping >= 0.0)) throw ConfigError("config: estimator_damping must be >= 0");
    if (!(t_max > 0.0)) throw ConfigError("config: t_max must be positive");
    if (!(goalDepth() > 0.0)) throw ConfigError("config: goal_depth must be positive");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

TrocarModel TrialConfig::resolvedTrocar() const {
  TrocarModel t = trocar;
  if (!placement) return t;
  const ChainFrames frames = forwardKinematics(chain, initial_q);
  const Vec3 tip = tipPosition(frames, chain);
  const Vec3 axis = opticalAxis(frames, chain);
  const Vec3 lateral = axis.unitOrthogonal();
  const Vec3 hinge = axis.cross(lateral);
  t.rest_center = tip + placement->approach_distance * axis + placement->lateral_offset * lateral;
  t.rest_axis = (Eigen::AngleAxisd(placement->angular_offset, hinge) * axis).normalized();
  return t;
}

TrialConfig configFromJson(const json& doc, const std::filesystem::path& base_dir) {
  TrialConfig c;
  try {
    allowKeys(doc, "root",
              {"chain", "limits", "initial_q", "trocar", "endoscope", "noise", "solver", "weights", "admittance",
               "sim"});
    bool limits_given = false;
    if (doc.contains("chain")) c.chain = resolveChain(doc.at("chain"), base_dir);

    if (doc.contains("limits")) {
      const auto& s = doc.at("limits");
      allowKeys(s, "limits", {"q_min", "q_max", "qdot_max"});
      c.limits.q_min = vec(s.at("q_min"));
      c.limits.q_max = vec(s.at("q_max"));
      c.limits.qdot_max = vec(s.at("qdot_max"));
      limits_given = true;
    }
    if (!limits_given && c.chain.dof() != 7) {
      throw ConfigError("config: 'limits' required for chains other than the built-in 7-DOF arm");
    }
    c.initial_q = doc.contains("initial_q") ? vec(doc.at("initial_q")) : defaultInitialQ(c.chain.dof());

    if (doc.contains("trocar")) {
      const auto& s = doc.at("trocar");
      allowKeys(s, "trocar",
                {"inner_radius", "outer_radius", "wall_thickness", "anchor_stiffness", "anchor_damping",
                 "contact_stiffness", "effective_mass", "rest_center", "rest_axis", "placement"});
      read(s, "inner_radius", c.trocar.inner_radius);
      read(s, "outer_radius", c.trocar.outer_radius);
      read(s, "wall_thickness", c.trocar.wall_thickness);
      read(s, "anchor_stiffness", c.trocar.anchor_stiffness);
      read(s, "anchor_damping", c.trocar.anchor_damping);
      read(s, "contact_stiffness", c.trocar.contact_stiffness);
      read(s, "effective_mass", c.trocar.effective_mass);
      if (s.contains("rest_center") != s.contains("rest_axis")) {
        throw ConfigError("config: trocar rest_center and rest_axis must be given together");
      }
      if (s.contains("rest_center")) {
        if (s.contains("placement")) throw ConfigError("config: give either trocar rest pose or placement");
        c.trocar.rest_center = vec3(s.at("rest_center"));
        const Vec3 axis = vec3(s.at("rest_axis"));
        if (!(axis.norm() > 0.0)) throw ConfigError("config: trocar rest_axis must be non-zero");
        c.trocar.rest_axis = axis.normalized();
        c.placement.reset();
      }
      if (s.contains("placement")) {
        const auto& p = s.at("placement");
        allowKeys(p, "trocar.placement", {"approach_distance", "lateral_offset", "angular_offset"});
        RelativePlacement rp;
        read(p, "approach_distance", rp.approach_distance);
        read(p, "lateral_offset", rp.lateral_offset);
        read(p, "angular_offset", rp.angular_offset);
        c.placement = rp;
      }
    }

    if (doc.contains("endoscope")) {
      const auto& s = doc.at("endoscope");
      allowKeys(s, "endoscope", {"shaft_radius", "shaft_length", "tool_tip_offset", "tool_axis"});
      read(s, "shaft_radius", c.endoscope.shaft_radius);
      read(s, "shaft_length", c.endoscope.shaft_length);
      if (s.contains("tool_tip_offset") || s.contains("tool_axis")) {
        const Vec3 tip = s.contains("tool_tip_offset") ? vec3(s.at("tool_tip_offset")) : c.chain.toolTipOffset();
        Vec3 axis = s.contains("tool_axis") ? vec3(s.at("tool_axis")) : c.chain.toolAxisLocal();
        if (!(axis.norm() > 0.0)) throw ConfigError("config: endoscope tool_axis must be non-zero");
        c.chain = c.chain.withTool(tip, axis.normalized());
      }
    }

    if (doc.contains("noise")) {
      const auto& s = doc.at("noise");
      allowKeys(s, "noise", {"sigma_pos", "sigma_axis"});
      read(s, "sigma_pos", c.noise.sigma_pos);
      read(s, "sigma_axis", c.noise.sigma_axis);
    }

    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      allowKeys(s, "solver", {"max_iterations", "step_tolerance", "gauss_newton_damping", "qp_max_iterations"});
      read(s, "max_iterations", c.solver.max_iterations);
      read(s, "step_tolerance", c.solver.step_tolerance);
      read(s, "gauss_newton_damping", c.solver.gauss_newton_damping);
      read(s, "qp_max_iterations", c.solver.qp_max_iterations);
    }

    if (doc.contains("weights")) {
      const auto& s = doc.at("weights");
      allowKeys(s, "weights", {"w", "epsilon_c5", "ff_enabled"});
      if (s.contains("w")) {
        const Eigen::VectorXd w = vec(s.at("w"));
        if (w.size() != kNumTerms) throw ConfigError("config: weights.w must have 5 entries");
        for (int i = 0; i < kNumTerms; ++i) c.weights[static_cast<std::size_t>(i)] = w[i];
      }
      read(s, "epsilon_c5", c.epsilon_c5);
      read(s, "ff_enabled", c.ff_enabled);
    }

    if (doc.contains("admittance")) {
      const auto& s = doc.at("admittance");
      allowKeys(s, "admittance", {"gain_alpha", "filter_beta", "force_deadband", "estimator_damping"});
      read(s, "gain_alpha", c.admittance.gain_alpha);
      read(s, "filter_beta", c.admittance.filter_beta);
      read(s, "force_deadband", c.admittance.force_deadband);
      read(s, "estimator_damping", c.estimator_damping);
    }

    if (doc.contains("sim")) {
      const auto& s = doc.at("sim");
      allowKeys(s, "sim",
                {"dt", "substep", "insertion_depth", "goal_depth", "tracking_time_constant", "t_max", "seed"});
      read(s, "dt", c.sim.dt);
      read(s, "substep", c.sim.substep);
      read(s, "insertion_depth", c.sim.insertion_depth);
      read(s, "tracking_time_constant", c.sim.tracking_time_constant);
      read(s, "t_max", c.t_max);
      read(s, "seed", c.seed);
      if (s.contains("goal_depth")) c.goal_depth = s.at("goal_depth").get<double>();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

TrialConfig loadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return configFromJson(doc, path.parent_path());
}

json configToJson(const TrialConfig& c) {
  json trocar = {{"inner_radius", c.trocar.inner_radius},
                 {"outer_radius", c.trocar.outer_radius},
                 {"wall_thickness", c.trocar.wall_thickness},
                 {"anchor_stiffness", c.trocar.anchor_stiffness},
                 {"anchor_damping", c.trocar.anchor_damping},
                 {"contact_stiffness", c.trocar.contact_stiffness},
                 {"effective_mass", c.trocar.effective_mass}};
  if (c.placement) {
    trocar["placement"] = {{"approach_distance", c.placement->approach_distance},
                           {"lateral_offset", c.placement->lateral_offset},
                           {"angular_offset", c.placement->angular_offset}};
  } else {
    trocar["rest_center"] = arr(c.trocar.rest_center);
    trocar["rest_axis"] = arr(c.trocar.rest_axis);
  }
  json sim = {{"dt", c.sim.dt},
              {"substep", c.sim.substep},
              {"insertion_depth", c.sim.insertion_depth},
              {"tracking_time_constant", c.sim.tracking_time_constant},
              {"t_max", c.t_max},
              {"seed", c.seed}};
  sim["goal_depth"] = c.goal_depth;
  return {{"chain", chainToJson(c.chain)},
          {"limits", {{"q_min", arr(c.limits.q_min)}, {"q_max", arr(c.limits.q_max)}, {"qdot_max", arr(c.limits.qdot_max)}}},
          {"initial_q", arr(c.initial_q)},
          {"trocar", trocar},
          {"endoscope", {{"shaft_radius", c.endoscope.shaft_radius}, {"shaft_length", c.endoscope.shaft_length}}},
          {"noise", {{"sigma_pos", c.noise.sigma_pos}, {"sigma_axis", c.noise.sigma_axis}}},
          {"solver",
           {{"max_iterations", c.solver.max_iterations},
            {"step_tolerance", c.solver.step_tolerance},
            {"gauss_newton_damping", c.solver.gauss_newton_damping},
            {"qp_max_iterations", c.solver.qp_max_iterations}}},
          {"weights", {{"w", c.weights}, {"epsilon_c5", c.epsilon_c5}, {"ff_enabled", c.ff_enabled}}},
          {"admittance",
           {{"gain_alpha", c.admittance.gain_alpha},
            {"filter_beta", c.admittance.filter_beta},
            {"force_deadband", c.admittance.force_deadband},
            {"estimator_damping", c.estimator_damping}}},
          {"sim", sim}};
}

}  // namespace trocar
