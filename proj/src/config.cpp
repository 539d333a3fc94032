#include "fform/config.hpp"

#include <set>

#include "fform/io.hpp"
#include "json_codec.hpp"

namespace fform {

const char* to_string(ThirdTermMode m) {
  return m == ThirdTermMode::kPenalizeNear ? "literal_eq5" : "objective2_consistent";
}
const char* to_string(DistanceMode m) {
  return m == DistanceMode::kLiteralSquared ? "literal_squared" : "euclidean";
}
const char* to_string(PoolSampling m) {
  return m == PoolSampling::kWithReplacement ? "uniform_with_replacement" : "uniform_without_replacement";
}

ThirdTermMode parse_third_term_mode(const std::string& s) {
  if (s == "literal_eq5") return ThirdTermMode::kPenalizeNear;
  if (s == "objective2_consistent") return ThirdTermMode::kPenalizeFar;
  throw Error(ErrorKind::kConfig, "unknown third_term_mode '" + s + "'");
}
DistanceMode parse_distance_mode(const std::string& s) {
  if (s == "literal_squared") return DistanceMode::kLiteralSquared;
  if (s == "euclidean") return DistanceMode::kEuclidean;
  throw Error(ErrorKind::kConfig, "unknown distance_mode '" + s + "'");
}
PoolSampling parse_pool_sampling(const std::string& s) {
  if (s == "uniform_with_replacement") return PoolSampling::kWithReplacement;
  if (s == "uniform_without_replacement") return PoolSampling::kWithoutReplacement;
  throw Error(ErrorKind::kConfig, "unknown pool_sampling '" + s + "'");
}

namespace codec {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::kConfig, where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorKind::kConfig, where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& into, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    into = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kConfig, where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

json to_json(const PlacementParams& p) {
  return json{{"beta", p.beta},
              {"gamma", p.gamma},
              {"theta", p.theta},
              {"r_d", p.r_d ? json(*p.r_d) : json(nullptr)},
              {"learning_rate", p.learning_rate},
              {"max_iters", p.max_iters},
              {"convergence_tol", p.convergence_tol},
              {"attempts", p.attempts},
              {"third_term_mode", to_string(p.third_term_mode)},
              {"distance_mode", to_string(p.distance_mode)}};
}

json to_json(const CameraConfig& c) {
  return json{{"distance", c.distance},
              {"height", c.height},
              {"yaw", c.yaw},
              {"focal_length", c.focal_length},
              {"image_size", {c.image_width, c.image_height}},
              {"person_height", c.person_height},
              {"person_radius", c.person_radius}};
}

json to_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

void overlay(const json& j, PlacementParams& into, const std::string& where) {
  reject_unknown(j,
                 {"beta", "gamma", "theta", "r_d", "learning_rate", "max_iters", "convergence_tol", "attempts",
                  "third_term_mode", "distance_mode"},
                 where);
  take(j, "beta", into.beta, where);
  take(j, "gamma", into.gamma, where);
  take(j, "theta", into.theta, where);
  if (const auto it = j.find("r_d"); it != j.end()) {
    if (it->is_null()) {
      into.r_d.reset();
    } else if (it->is_number()) {
      into.r_d = it->get<double>();
    } else {
      throw Error(ErrorKind::kConfig, where + ": field 'r_d' must be a number or null");
    }
  }
  take(j, "learning_rate", into.learning_rate, where);
  take(j, "max_iters", into.max_iters, where);
  take(j, "convergence_tol", into.convergence_tol, where);
  take(j, "attempts", into.attempts, where);
  std::string mode;
  if (j.contains("third_term_mode")) {
    take(j, "third_term_mode", mode, where);
    into.third_term_mode = parse_third_term_mode(mode);
  }
  if (j.contains("distance_mode")) {
    take(j, "distance_mode", mode, where);
    into.distance_mode = parse_distance_mode(mode);
  }
}

void overlay(const json& j, CameraConfig& into, const std::string& where) {
  reject_unknown(j, {"distance", "height", "yaw", "focal_length", "image_size", "person_height", "person_radius"},
                 where);
  take(j, "distance", into.distance, where);
  take(j, "height", into.height, where);
  take(j, "yaw", into.yaw, where);
  take(j, "focal_length", into.focal_length, where);
  if (const auto it = j.find("image_size"); it != j.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer()) {
      throw Error(ErrorKind::kConfig, where + ": 'image_size' must be [width, height] integers");
    }
    into.image_width = (*it)[0].get<int>();
    into.image_height = (*it)[1].get<int>();
  }
  take(j, "person_height", into.person_height, where);
  take(j, "person_radius", into.person_radius, where);
}

void overlay(const json& j, Interval& into, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorKind::kConfig, where + ": expected [lo, hi]");
  }
  into.lo = j[0].get<double>();
  into.hi = j[1].get<double>();
}

}  // namespace codec

std::string to_json_text(const ToolConfig& cfg) {
  using codec::json;
  json camera{{"distance", codec::to_json(cfg.camera.distance)},
              {"height", codec::to_json(cfg.camera.height)},
              {"yaw", codec::to_json(cfg.camera.yaw)},
              {"fixed", codec::to_json(cfg.camera.fixed)}};
  json scene{{"group_count_range", {cfg.scene.min_groups, cfg.scene.max_groups}},
             {"rotation_range", {cfg.scene.rotation_min, cfg.scene.rotation_max}},
             {"pool_sampling", to_string(cfg.scene.pool_sampling)}};
  json j{{"placement", codec::to_json(cfg.scene.placement)}, {"scene", scene}, {"camera", camera}};
  return j.dump(2) + "\n";
}

ToolConfig apply_overrides(const ToolConfig& base, const std::string& json_text) {
  using codec::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  ToolConfig cfg = base;
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "placement") {
      codec::overlay(value, cfg.scene.placement, "config.placement");
    } else if (key == "scene") {
      if (!value.is_object()) throw Error(ErrorKind::kConfig, "config.scene must be an object");
      for (const auto& [k, v] : value.items()) {
        if (k == "group_count_range") {
          if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
            throw Error(ErrorKind::kConfig, "config.scene.group_count_range must be [min, max] integers");
          }
          cfg.scene.min_groups = v[0].get<int>();
          cfg.scene.max_groups = v[1].get<int>();
        } else if (k == "rotation_range") {
          Interval iv;
          codec::overlay(v, iv, "config.scene.rotation_range");
          cfg.scene.rotation_min = iv.lo;
          cfg.scene.rotation_max = iv.hi;
        } else if (k == "pool_sampling") {
          if (!v.is_string()) throw Error(ErrorKind::kConfig, "config.scene.pool_sampling must be a string");
          cfg.scene.pool_sampling = parse_pool_sampling(v.get<std::string>());
        } else {
          throw Error(ErrorKind::kConfig, "config.scene: unknown key '" + k + "'");
        }
      }
    } else if (key == "camera") {
      if (!value.is_object()) throw Error(ErrorKind::kConfig, "config.camera must be an object");
      for (const auto& [k, v] : value.items()) {
        if (k == "distance") {
          codec::overlay(v, cfg.camera.distance, "config.camera.distance");
        } else if (k == "height") {
          codec::overlay(v, cfg.camera.height, "config.camera.height");
        } else if (k == "yaw") {
          codec::overlay(v, cfg.camera.yaw, "config.camera.yaw");
        } else if (k == "fixed") {
          codec::overlay(v, cfg.camera.fixed, "config.camera.fixed");
        } else {
          throw Error(ErrorKind::kConfig, "config.camera: unknown key '" + k + "'");
        }
      }
    } else {
      throw Error(ErrorKind::kConfig, "config: unknown key '" + key + "'");
    }
  }
  cfg.scene.validate();
  return cfg;
}

ToolConfig load_config(const std::string& path) { return apply_overrides(ToolConfig{}, read_text(path)); }

}  // namespace fform
