#pragma once

// nlohmann::json conversions shared by config.cpp and io.cpp.

#include <json.hpp>

#include "fform/config.hpp"
#include "fform/error.hpp"

namespace fform::codec {

using nlohmann::json;

json to_json(const PlacementParams& p);
json to_json(const CameraConfig& c);
json to_json(const Interval& iv);

/// Overlay: keys present in `j` replace fields of `into`. Unknown keys throw kConfig.
void overlay(const json& j, PlacementParams& into, const std::string& where);
void overlay(const json& j, CameraConfig& into, const std::string& where);
void overlay(const json& j, Interval& into, const std::string& where);

/// Reads a number/string/etc with a kParse error naming `where`.
template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::kParse, where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kParse, where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace fform::codec
