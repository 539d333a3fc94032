#pragma once

// Geometric vocabulary for conversational groups: member poses, Gaussian
// group summaries, inter-group distance, directional spread, the
// distance-to-variance ratio r_d, and rigid group transforms.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace fform {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Lower bound on directional spread; keeps d / sigma finite for collinear groups.
inline constexpr double kSigmaFloor = 1e-6;
/// Centers closer than this (meters) have no defined direction.
inline constexpr double kDirectionEpsilon = 1e-9;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double squared_norm(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct SymMat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double quadratic(Vec2 v) const { return v.x * (xx * v.x + xy * v.y) + v.y * (xy * v.x + yy * v.y); }
  friend bool operator==(const SymMat2&, const SymMat2&) = default;
};

/// R * S * R^T for a rotation by `angle`.
SymMat2 rotate(const SymMat2& s, double angle);

/// Wraps an angle into [0, 2*pi).
double normalize_angle(double radians);

struct PersonPose {
  std::string person_id;
  Vec2 position;                            // meters, ground plane
  double body_orientation = 0.0;            // radians in [0, 2*pi)
  std::optional<double> head_orientation;   // carried through, unused by any formula

  friend bool operator==(const PersonPose&, const PersonPose&) = default;
};

struct GroupGeometry {
  std::string group_id;
  std::vector<PersonPose> members;

  friend bool operator==(const GroupGeometry&, const GroupGeometry&) = default;
};

/// Throws kInvalidGroup unless the group has >= 2 members with unique ids,
/// finite positions and orientations in [0, 2*pi).
void validate_group(const GroupGeometry& g);

struct GaussianSummary {
  Vec2 mu;        // group center, meters
  SymMat2 sigma;  // population covariance of member positions, m^2
};

enum class DistanceMode { kLiteralSquared, kEuclidean };

struct PoolScene {
  std::string scene_id;
  std::vector<GroupGeometry> groups;
};

struct GroupPool {
  std::vector<PoolScene> scenes;
  DistanceMode distance_mode = DistanceMode::kEuclidean;

  std::size_t group_count() const;
};

/// Throws kValidation for empty scenes, duplicate group ids or invalid groups.
void validate_pool(const GroupPool& pool);

/// Mean and population (divide-by-n) covariance of member positions.
GaussianSummary summarize_group(const GroupGeometry& g);

/// ||mu_a - mu_b||^2 in literal-squared mode, ||mu_a - mu_b|| in euclidean mode.
double inter_group_distance(const GaussianSummary& a, const GaussianSummary& b, DistanceMode mode);
double center_distance(Vec2 a, Vec2 b, DistanceMode mode);

/// sqrt(u^T Sigma u) for unit `direction`, floored at kSigmaFloor.
double spread_along(const SymMat2& sigma, Vec2 direction);

/// Spread of `from` in the direction of `toward`'s center. Throws
/// kDegenerateDirection when the centers coincide within kDirectionEpsilon.
double directional_variance(const GaussianSummary& from, const GaussianSummary& toward);

/// Mean of d(i, j) / sigma(i; j) over ordered same-scene pairs i != j.
/// Throws kInsufficientPairs when no scene holds two groups.
double estimate_distance_variance_ratio(const GroupPool& pool);

/// Rotates members about the group mean, then translates. Orientations are
/// advanced by `rotation` and re-wrapped.
GroupGeometry transform_group(const GroupGeometry& g, double rotation, Vec2 translation);

}  // namespace fform
