#pragma once

// Tool configuration: every placement, scene and camera field, with JSON
// overrides. Missing keys keep their defaults; unknown keys are rejected.

#include <string>

#include "fform/imaging.hpp"
#include "fform/synthesis.hpp"

namespace fform {

struct ToolConfig {
  SceneConfig scene;
  CameraRanges camera;
};

std::string to_json_text(const ToolConfig& cfg);
/// Applies the overrides in `json_text` on top of `base`. Throws kConfig.
ToolConfig apply_overrides(const ToolConfig& base, const std::string& json_text);
ToolConfig load_config(const std::string& path);

const char* to_string(ThirdTermMode m);
const char* to_string(DistanceMode m);
const char* to_string(PoolSampling m);
ThirdTermMode parse_third_term_mode(const std::string& s);
DistanceMode parse_distance_mode(const std::string& s);
PoolSampling parse_pool_sampling(const std::string& s);

}  // namespace fform
