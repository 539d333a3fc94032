#include "fform/geometry.hpp"

#include <algorithm>
#include <set>

#include "fform/error.hpp"

namespace fform {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidGroup: return "invalid-group";
    case ErrorKind::kDegenerateDirection: return "degenerate-direction";
    case ErrorKind::kInsufficientPairs: return "insufficient-pairs";
    case ErrorKind::kUndefinedLoss: return "undefined-loss";
    case ErrorKind::kPoolExhausted: return "pool-exhausted";
    case ErrorKind::kDegenerateProjection: return "degenerate-projection";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kNotFound: return "not-found";
    case ErrorKind::kUndefinedRate: return "undefined-rate";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kSchemaVersion: return "schema-version";
    case ErrorKind::kEmptyDataset: return "empty-dataset";
    case ErrorKind::kSpec: return "spec";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

SymMat2 rotate(const SymMat2& s, double angle) {
  const double c = std::cos(angle);
  const double n = std::sin(angle);
  // R S R^T with R = [[c, -n], [n, c]]
  const double a = c * s.xx - n * s.xy;
  const double b = c * s.xy - n * s.yy;
  const double d = n * s.xx + c * s.xy;
  const double e = n * s.xy + c * s.yy;
  return {a * c - b * n, a * n + b * c, d * n + e * c};
}

double normalize_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

namespace {

bool angle_ok(double a) { return std::isfinite(a) && a >= 0.0 && a < kTwoPi; }

}  // namespace

void validate_group(const GroupGeometry& g) {
  if (g.members.size() < 2) {
    throw Error(ErrorKind::kInvalidGroup,
                "group '" + g.group_id + "' has " + std::to_string(g.members.size()) +
                    " member(s); at least 2 are required");
  }
  std::set<std::string> seen;
  for (const auto& m : g.members) {
    if (!seen.insert(m.person_id).second) {
      throw Error(ErrorKind::kInvalidGroup,
                  "group '" + g.group_id + "' repeats person id '" + m.person_id + "'");
    }
    if (!std::isfinite(m.position.x) || !std::isfinite(m.position.y)) {
      throw Error(ErrorKind::kInvalidGroup,
                  "person '" + m.person_id + "' in group '" + g.group_id + "' has a non-finite position");
    }
    if (!angle_ok(m.body_orientation) || (m.head_orientation && !angle_ok(*m.head_orientation))) {
      throw Error(ErrorKind::kInvalidGroup,
                  "person '" + m.person_id + "' in group '" + g.group_id +
                      "' has an orientation outside [0, 2*pi)");
    }
  }
}

std::size_t GroupPool::group_count() const {
  std::size_t n = 0;
  for (const auto& s : scenes) n += s.groups.size();
  return n;
}

void validate_pool(const GroupPool& pool) {
  for (const auto& scene : pool.scenes) {
    if (scene.groups.empty()) {
      throw Error(ErrorKind::kValidation, "pool scene '" + scene.scene_id + "' lists no groups");
    }
    std::set<std::string> ids;
    for (const auto& g : scene.groups) {
      if (!ids.insert(g.group_id).second) {
        throw Error(ErrorKind::kValidation,
                    "pool scene '" + scene.scene_id + "' repeats group id '" + g.group_id + "'");
      }
      try {
        validate_group(g);
      } catch (const Error& e) {
        throw Error(ErrorKind::kValidation, "pool scene '" + scene.scene_id + "': " + e.what());
      }
    }
  }
}

GaussianSummary summarize_group(const GroupGeometry& g) {
  if (g.members.size() < 2) {
    throw Error(ErrorKind::kInvalidGroup,
                "cannot summarize group '" + g.group_id + "' with fewer than 2 members");
  }
  const double n = static_cast<double>(g.members.size());
  Vec2 mean;
  for (const auto& m : g.members) mean += m.position;
  mean = mean * (1.0 / n);

  SymMat2 cov;
  for (const auto& m : g.members) {
    const Vec2 d = m.position - mean;
    cov.xx += d.x * d.x;
    cov.xy += d.x * d.y;
    cov.yy += d.y * d.y;
  }
  cov.xx /= n;
  cov.xy /= n;
  cov.yy /= n;
  return {mean, cov};
}

double center_distance(Vec2 a, Vec2 b, DistanceMode mode) {
  const Vec2 d = a - b;
  return mode == DistanceMode::kLiteralSquared ? squared_norm(d) : norm(d);
}

double inter_group_distance(const GaussianSummary& a, const GaussianSummary& b, DistanceMode mode) {
  return center_distance(a.mu, b.mu, mode);
}

double spread_along(const SymMat2& sigma, Vec2 direction) {
  const double q = sigma.quadratic(direction);
  return std::max(std::sqrt(std::max(q, 0.0)), kSigmaFloor);
}

double directional_variance(const GaussianSummary& from, const GaussianSummary& toward) {
  const Vec2 d = toward.mu - from.mu;
  const double len = norm(d);
  if (len <= kDirectionEpsilon) {
    throw Error(ErrorKind::kDegenerateDirection, "group centers coincide; direction is undefined");
  }
  return spread_along(from.sigma, d * (1.0 / len));
}

double estimate_distance_variance_ratio(const GroupPool& pool) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& scene : pool.scenes) {
    if (scene.groups.size() < 2) continue;
    std::vector<GaussianSummary> summaries;
    summaries.reserve(scene.groups.size());
    for (const auto& g : scene.groups) summaries.push_back(summarize_group(g));
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      for (std::size_t j = 0; j < summaries.size(); ++j) {
        if (i == j) continue;
        const double d = inter_group_distance(summaries[i], summaries[j], pool.distance_mode);
        // coincident centers contribute d = 0 whatever the spread
        if (norm(summaries[j].mu - summaries[i].mu) > kDirectionEpsilon) {
          sum += d / directional_variance(summaries[i], summaries[j]);
        }
        ++pairs;
      }
    }
  }
  if (pairs == 0) {
    throw Error(ErrorKind::kInsufficientPairs, "no pool scene contains two or more groups");
  }
  return sum / static_cast<double>(pairs);
}

GroupGeometry transform_group(const GroupGeometry& g, double rotation, Vec2 translation) {
  Vec2 mean;
  for (const auto& m : g.members) mean += m.position;
  if (!g.members.empty()) mean = mean * (1.0 / static_cast<double>(g.members.size()));

  GroupGeometry out = g;
  for (auto& m : out.members) {
    if (rotation == 0.0) {
      m.position = m.position + translation;
    } else {
      m.position = mean + rotate(m.position - mean, rotation) + translation;
    }
    m.body_orientation = normalize_angle(m.body_orientation + rotation);
    if (m.head_orientation) m.head_orientation = normalize_angle(*m.head_orientation + rotation);
  }
  return out;
}

}  // namespace fform
