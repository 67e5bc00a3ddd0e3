#pragma once

#include "trocar/kinematics.hpp"

#include <json.hpp>

#include <filesystem>

namespace trocar {

// {"joints":[{"origin":[x,y,z],"orientation_rpy":[r,p,y],"axis":[x,y,z]}, ...],
//  "tool_tip_offset":[x,y,z], "tool_axis":[x,y,z]}
// Radians and meters. Axes are normalized on load.
KinematicChain chainFromJson(const nlohmann::json& doc);
nlohmann::json chainToJson(const KinematicChain& chain);
KinematicChain loadChainFile(const std::filesystem::path& path);

// Resolves "builtin:lbr_med7", "builtin:planar2", a path (relative to
// base_dir) or an inline chain object.
KinematicChain resolveChain(const nlohmann::json& ref, const std::filesystem::path& base_dir);

}  // namespace trocar
