#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fform/geometry.hpp"

namespace support {

inline fform::GroupGeometry make_group(const std::string& id, const std::vector<fform::Vec2>& points) {
  fform::GroupGeometry g{id, {}};
  for (std::size_t k = 0; k < points.size(); ++k) {
    g.members.push_back({id + "p" + std::to_string(k), points[k], 0.0, std::nullopt});
  }
  return g;
}

/// Four members on the axes; population covariance is s^2 * I.
inline fform::GroupGeometry isotropic_group(const std::string& id, fform::Vec2 center, double s) {
  const double a = s * std::sqrt(2.0);
  return make_group(id, {{center.x + a, center.y}, {center.x - a, center.y}, {center.x, center.y + a},
                         {center.x, center.y - a}});
}

}  // namespace support
