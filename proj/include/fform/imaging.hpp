#pragma once

// Synthetic pinhole camera, depth-ordered person boxes and occlusion rates.
//
// Camera model: the camera sits on the circle of radius `distance` around the
// centroid of the group centers, at angle `yaw`, `height` meters above the
// ground, with a horizontal optical axis pointing at the centroid. The
// principal point is the image center. Each person is a vertical cylinder
// whose box is the frontal cross-section (2 * radius by height) projected at
// the depth of the cylinder axis.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fform/rect_area.hpp"
#include "fform/synthesis.hpp"

namespace fform {

struct CameraConfig {
  double distance = 15.0;  // meters, camera to centroid of group centers
  double height = 1.8;     // meters above ground
  double yaw = 0.0;        // radians; camera position angle about the centroid
  double focal_length = 1000.0;  // pixels
  int image_width = 1920;
  int image_height = 1080;
  double person_height = 1.75;
  double person_radius = 0.25;

  void validate() const;
  friend bool operator==(const CameraConfig&, const CameraConfig&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Intervals for the sampled camera fields; the rest are copied from `fixed`.
struct CameraRanges {
  Interval distance{15.0, 25.0};
  Interval height{1.5, 3.0};
  Interval yaw{0.0, kTwoPi};
  CameraConfig fixed;
};

struct BoundingBox {
  std::string person_id;
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  double depth = 0.0;  // camera-frame forward distance, meters

  Rect rect() const { return {x1, y1, x2, y2}; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Camera position on the ground plane for `scene`.
Vec2 camera_position(const SceneGeometry& scene, const CameraConfig& cam);
Vec2 scene_centroid(const SceneGeometry& scene);

/// Boxes clipped to the image, zero-area boxes dropped, sorted by
/// (depth, person_id). Persons at or behind the image plane are excluded.
/// Throws kDegenerateProjection when the camera stands inside a person.
std::vector<BoundingBox> project_scene(const SceneGeometry& scene, const CameraConfig& cam);

/// Uniform draws for distance, height and yaw. Throws kConfig on an inverted
/// or non-finite interval.
CameraConfig sample_camera(const SceneGeometry& scene, const CameraRanges& ranges, std::uint64_t rng_seed);

/// True when `a` is drawn in front of `b`: strictly nearer, ties by person_id.
bool occludes(const BoundingBox& a, const BoundingBox& b);

/// Fraction of person `k`'s box covered by boxes in front of it.
/// Throws kNotFound for an unknown id.
double individual_occlusion(std::span<const BoundingBox> boxes, const std::string& k);
double individual_non_occlusion(std::span<const BoundingBox> boxes, const std::string& k);

struct GroupOcclusion {
  double non_occlusion = 1.0;
  double occlusion = 0.0;
};

/// Visible fraction of the union of the group's boxes. Members without a box
/// contribute nothing; throws kUndefinedRate when the group has no area.
GroupOcclusion group_occlusion(std::span<const BoundingBox> boxes, std::span<const std::string> group_members);

struct OcclusionStats {
  std::vector<std::string> person_ids;       // aligned with `individual`
  std::vector<double> individual;            // O_I per person
  std::vector<std::optional<double>> group;  // occlusion per group; empty when undefined
};

/// Serial reference over every box and group of one frame.
OcclusionStats occlusion_stats_serial(std::span<const BoundingBox> boxes,
                                      std::span<const std::vector<std::string>> groups);
/// OpenMP version; bit-identical to the serial reference.
OcclusionStats occlusion_stats(std::span<const BoundingBox> boxes, std::span<const std::vector<std::string>> groups,
                               int workers = 1);

}  // namespace fform
