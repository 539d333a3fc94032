#include "fform/imaging.hpp"

#include <algorithm>
#include <random>

#include <omp.h>

#include "fform/error.hpp"

namespace fform {

void CameraConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kConfig, "camera: " + what); };
  if (!(distance > 0.0) || !std::isfinite(distance)) fail("distance must be finite and > 0");
  if (!std::isfinite(height)) fail("height must be finite");
  if (!std::isfinite(yaw)) fail("yaw must be finite");
  if (!(focal_length > 0.0) || !std::isfinite(focal_length)) fail("focal_length must be finite and > 0");
  if (image_width < 1 || image_height < 1) fail("image dimensions must be >= 1");
  if (!(person_height > 0.0) || !(person_radius > 0.0)) fail("person dimensions must be > 0");
}

Vec2 scene_centroid(const SceneGeometry& scene) {
  Vec2 c;
  if (scene.groups.empty()) return c;
  for (const auto& g : scene.groups) c += summarize_group(g).mu;
  return c * (1.0 / static_cast<double>(scene.groups.size()));
}

Vec2 camera_position(const SceneGeometry& scene, const CameraConfig& cam) {
  return scene_centroid(scene) + Vec2{cam.distance * std::cos(cam.yaw), cam.distance * std::sin(cam.yaw)};
}

bool occludes(const BoundingBox& a, const BoundingBox& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  return a.person_id < b.person_id;
}

std::vector<BoundingBox> project_scene(const SceneGeometry& scene, const CameraConfig& cam) {
  cam.validate();
  const Vec2 origin = camera_position(scene, cam);
  const Vec2 forward{-std::cos(cam.yaw), -std::sin(cam.yaw)};
  const Vec2 right{forward.y, -forward.x};
  const double cx = 0.5 * cam.image_width;
  const double cy = 0.5 * cam.image_height;
  const double w = cam.image_width;
  const double h = cam.image_height;

  std::vector<BoundingBox> boxes;
  for (const auto& g : scene.groups) {
    for (const auto& m : g.members) {
      const Vec2 rel = m.position - origin;
      if (norm(rel) <= cam.person_radius) {
        throw Error(ErrorKind::kDegenerateProjection,
                    "camera stands inside person '" + m.person_id + "' in scene '" + scene.scene_id + "'");
      }
      const double depth = dot(rel, forward);
      if (depth <= 0.0) continue;
      const double lateral = dot(rel, right);
      const double s = cam.focal_length / depth;
      BoundingBox b;
      b.person_id = m.person_id;
      b.depth = depth;
      b.x1 = std::clamp(cx + s * (lateral - cam.person_radius), 0.0, w);
      b.x2 = std::clamp(cx + s * (lateral + cam.person_radius), 0.0, w);
      b.y1 = std::clamp(cy - s * (cam.person_height - cam.height), 0.0, h);
      b.y2 = std::clamp(cy + s * cam.height, 0.0, h);
      if (b.x2 > b.x1 && b.y2 > b.y1) boxes.push_back(std::move(b));
    }
  }
  std::sort(boxes.begin(), boxes.end(), occludes);
  return boxes;
}

namespace {

void check_interval(const Interval& iv, const char* name) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
    throw Error(ErrorKind::kConfig, std::string("camera range '") + name + "' must be a finite interval with lo <= hi");
  }
}

double draw(std::mt19937_64& rng, const Interval& iv) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return iv.lo == iv.hi ? iv.lo : iv.lo + u * (iv.hi - iv.lo);
}

}  // namespace

CameraConfig sample_camera(const SceneGeometry& /*scene*/, const CameraRanges& ranges, std::uint64_t rng_seed) {
  check_interval(ranges.distance, "distance");
  check_interval(ranges.height, "height");
  check_interval(ranges.yaw, "yaw");
  std::mt19937_64 rng(rng_seed);
  CameraConfig cam = ranges.fixed;
  cam.distance = draw(rng, ranges.distance);
  cam.height = draw(rng, ranges.height);
  cam.yaw = draw(rng, ranges.yaw);
  cam.validate();
  return cam;
}

namespace {

const BoundingBox& find_box(std::span<const BoundingBox> boxes, const std::string& k) {
  for (const auto& b : boxes) {
    if (b.person_id == k) return b;
  }
  throw Error(ErrorKind::kNotFound, "no bounding box for person '" + k + "'");
}

Region visible_region(std::span<const BoundingBox> boxes, const BoundingBox& target) {
  Region r{target.rect(), {}};
  for (const auto& b : boxes) {
    if (occludes(b, target) && b.rect().overlaps(r.rect)) r.holes.push_back(b.rect());
  }
  return r;
}

double non_occlusion_of(std::span<const BoundingBox> boxes, const BoundingBox& target) {
  const double total = target.rect().area();
  if (total <= 0.0) throw Error(ErrorKind::kUndefinedRate, "box of '" + target.person_id + "' has zero area");
  const Region r = visible_region(boxes, target);
  return std::clamp(region_union_area(std::span<const Region>(&r, 1)) / total, 0.0, 1.0);
}

}  // namespace

double individual_non_occlusion(std::span<const BoundingBox> boxes, const std::string& k) {
  return non_occlusion_of(boxes, find_box(boxes, k));
}

double individual_occlusion(std::span<const BoundingBox> boxes, const std::string& k) {
  return 1.0 - individual_non_occlusion(boxes, k);
}

GroupOcclusion group_occlusion(std::span<const BoundingBox> boxes, std::span<const std::string> group_members) {
  std::vector<Region> regions;
  std::vector<Rect> extents;
  for (const auto& id : group_members) {
    const auto it = std::find_if(boxes.begin(), boxes.end(), [&](const BoundingBox& b) { return b.person_id == id; });
    if (it == boxes.end()) continue;
    regions.push_back(visible_region(boxes, *it));
    extents.push_back(it->rect());
  }
  const double total = union_area(extents);
  if (total <= 0.0) throw Error(ErrorKind::kUndefinedRate, "group has no visible box area");
  GroupOcclusion out;
  out.non_occlusion = std::clamp(region_union_area(regions) / total, 0.0, 1.0);
  out.occlusion = 1.0 - out.non_occlusion;
  return out;
}

namespace {

std::optional<double> group_rate(std::span<const BoundingBox> boxes, const std::vector<std::string>& members) {
  try {
    return group_occlusion(boxes, members).occlusion;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kUndefinedRate) throw;
    return std::nullopt;
  }
}

}  // namespace

OcclusionStats occlusion_stats_serial(std::span<const BoundingBox> boxes,
                                      std::span<const std::vector<std::string>> groups) {
  OcclusionStats s;
  s.person_ids.reserve(boxes.size());
  s.individual.reserve(boxes.size());
  for (const auto& b : boxes) {
    s.person_ids.push_back(b.person_id);
    s.individual.push_back(1.0 - non_occlusion_of(boxes, b));
  }
  for (const auto& g : groups) s.group.push_back(group_rate(boxes, g));
  return s;
}

OcclusionStats occlusion_stats(std::span<const BoundingBox> boxes, std::span<const std::vector<std::string>> groups,
                               int workers) {
  if (workers < 1) throw Error(ErrorKind::kParameter, "workers must be >= 1");
  OcclusionStats s;
  s.person_ids.resize(boxes.size());
  s.individual.resize(boxes.size());
  s.group.resize(groups.size());
  const auto n = static_cast<std::int64_t>(boxes.size());
  const auto m = static_cast<std::int64_t>(groups.size());
#pragma omp parallel num_threads(workers)
  {
#pragma omp for schedule(dynamic) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      s.person_ids[k] = boxes[k].person_id;
      s.individual[k] = 1.0 - non_occlusion_of(boxes, boxes[k]);
    }
#pragma omp for schedule(dynamic)
    for (std::int64_t i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      s.group[k] = group_rate(boxes, groups[k]);
    }
  }
  return s;
}

}  // namespace fform
