#include "trocar/chain_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace trocar {

namespace {

Vec3 vec3(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) {
    throw std::invalid_argument(std::string("chain: missing field '") + key + "'");
  }
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw std::invalid_argument(std::string("chain: field '") + key + "' must be a 3-array");
  }
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

Vec3 unit(const Vec3& v, const char* what) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument(std::string("chain: zero or non-finite ") + what);
  }
  return v / norm;
}

Eigen::Quaterniond fromRpy(const Vec3& rpy) {
  // Fixed-axis roll-pitch-yaw: R = Rz(yaw) Ry(pitch) Rx(roll).
  return Eigen::Quaterniond(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                            Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                            Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
}

Vec3 toRpy(const Eigen::Quaterniond& q) {
  const Mat3 r = q.toRotationMatrix();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return Vec3(roll, pitch, yaw);
}

nlohmann::json arr(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace

KinematicChain chainFromJson(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("joints") || !doc.at("joints").is_array()) {
    throw std::invalid_argument("chain: expected an object with a 'joints' array");
  }
  std::vector<JointSpec> joints;
  for (const auto& j : doc.at("joints")) {
    JointSpec spec;
    spec.origin_offset = vec3(j, "origin");
    spec.orientation_offset =
        j.contains("orientation_rpy") ? fromRpy(vec3(j, "orientation_rpy")) : Eigen::Quaterniond::Identity();
    spec.axis = unit(vec3(j, "axis"), "joint axis");
    joints.push_back(spec);
  }
  return KinematicChain(std::move(joints), vec3(doc, "tool_tip_offset"),
                        unit(vec3(doc, "tool_axis"), "tool axis"));
}

nlohmann::json chainToJson(const KinematicChain& chain) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& j : chain.joints()) {
    joints.push_back({{"origin", arr(j.origin_offset)},
                      {"orientation_rpy", arr(toRpy(j.orientation_offset))},
                      {"axis", arr(j.axis)}});
  }
  return {{"joints", joints},
          {"tool_tip_offset", arr(chain.toolTipOffset())},
          {"tool_axis", arr(chain.toolAxisLocal())}};
}

KinematicChain loadChainFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("chain: cannot open " + path.string());
  }
  return chainFromJson(nlohmann::json::parse(in));
}

KinematicChain resolveChain(const nlohmann::json& ref, const std::filesystem::path& base_dir) {
  if (ref.is_object()) {
    return chainFromJson(ref);
  }
  if (!ref.is_string()) {
    throw std::invalid_argument("chain: expected a builtin name, a path or an object");
  }
  const auto name = ref.get<std::string>();
  if (name == "builtin:lbr_med7") return chains::lbrMed7();
  if (name == "builtin:planar2") return chains::planar2();
  if (name.rfind("builtin:", 0) == 0) {
    throw std::invalid_argument("chain: unknown builtin '" + name + "'");
  }
  std::filesystem::path path(name);
  if (path.is_relative()) path = base_dir / path;
  return loadChainFile(path);
}

}  // namespace trocar
