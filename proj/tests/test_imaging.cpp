#include <doctest.h>

#include <random>

#include "fform/error.hpp"
#include "fform/imaging.hpp"
#include "fform/rect_area.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace fform;

namespace {

SceneGeometry scene_of(std::vector<GroupGeometry> groups) {
  SceneGeometry s;
  s.scene_id = "t";
  s.groups = std::move(groups);
  return s;
}

BoundingBox box(const std::string& id, double x1, double y1, double x2, double y2, double depth) {
  return {id, x1, y1, x2, y2, depth};
}

const BoundingBox& find(const std::vector<BoundingBox>& boxes, const std::string& id) {
  for (const auto& b : boxes) {
    if (b.person_id == id) return b;
  }
  throw std::runtime_error("missing " + id);
}

}  // namespace

TEST_CASE("rect_area primitives") {
  std::vector<Rect> rs{{0, 0, 2, 2}, {1, 1, 3, 3}};
  CHECK(union_area(rs) == doctest::Approx(7.0));
  CHECK(uncovered_area({0, 0, 10, 10}, std::vector<Rect>{{0, 0, 5, 10}}) == doctest::Approx(50.0));
  CHECK(uncovered_area({0, 0, 1, 1}, {}) == 1.0);
  std::vector<Region> regions{{{0, 0, 4, 4}, {{1, 1, 3, 3}}}, {{2, 2, 3, 3}, {}}};
  CHECK(region_union_area(regions) == doctest::Approx(13.0));
  CHECK(Rect{0, 0, -1, 1}.area() == 0.0);
}

TEST_CASE("a person on the optical axis projects to f*H/D, centered") {
  CameraConfig cam;
  cam.distance = 12.0;
  auto scene = scene_of({support::make_group("a", {{-1, 0}, {1, 0}})});
  const auto boxes = project_scene(scene, cam);
  REQUIRE(boxes.size() == 2);
  for (const auto& b : boxes) {
    const double D = b.depth;
    CHECK(b.y2 - b.y1 == doctest::Approx(cam.focal_length * cam.person_height / D).epsilon(1e-12));
    CHECK(0.5 * (b.x1 + b.x2) == doctest::Approx(cam.image_width / 2.0).epsilon(1e-12));
  }
  CHECK(boxes[0].depth == doctest::Approx(11.0));
  CHECK(boxes[1].depth == doctest::Approx(13.0));
  CHECK(boxes[0].person_id == "ap1");
}

TEST_CASE("doubling the distance halves the box") {
  // tiny focal length keeps every box away from the image border
  CameraConfig near;
  near.focal_length = 50.0;
  near.distance = 6.0;
  near.yaw = 0.4;
  CameraConfig far = near;
  auto scene = scene_of({support::make_group("a", {{0, 0}, {0.5, 0.2}})});
  // move the scene so that camera-to-person depth doubles: scale positions about the camera
  const Vec2 cam_pos = camera_position(scene, near);
  auto doubled = scene;
  for (auto& m : doubled.groups[0].members) m.position = cam_pos + 2.0 * (m.position - cam_pos);
  far.distance = 12.0;
  const auto a = project_scene(scene, near);
  const auto b = project_scene(doubled, far);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& pa = find(a, a[i].person_id);
    const auto& pb = find(b, a[i].person_id);
    CHECK(pb.depth == doctest::Approx(2.0 * pa.depth).epsilon(1e-12));
    CHECK(pb.y2 - pb.y1 == doctest::Approx((pa.y2 - pa.y1) / 2.0).epsilon(1e-12));
    CHECK(pb.x2 - pb.x1 == doctest::Approx((pa.x2 - pa.x1) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("persons behind the camera are excluded") {
  CameraConfig cam;
  cam.distance = 5.0;
  // centroid of group centers is (0,0); camera at (5,0) looking toward -x
  auto scene = scene_of({support::make_group("a", {{-0.5, 0}, {0.5, 0}}),
                         support::make_group("b", {{7.5, 0}, {8.5, 0.3}}),
                         support::make_group("c", {{-8.5, 0}, {-7.5, -0.3}})});
  const auto boxes = project_scene(scene, cam);
  for (const auto& b : boxes) CHECK(b.person_id.rfind("bp", 0) != 0);
  CHECK(boxes.size() == 4);
}

TEST_CASE("a camera inside a person is degenerate") {
  CameraConfig cam;
  cam.distance = 1.0;
  auto scene = scene_of({support::make_group("a", {{-1, 0}, {1, 0}})});
  try {
    project_scene(scene, cam);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateProjection);
  }
}

TEST_CASE("projection is deterministic and sorted by depth") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-4, 4);
  std::vector<GroupGeometry> groups;
  for (int g = 0; g < 4; ++g) {
    groups.push_back(support::make_group("g" + std::to_string(g), {{u(rng), u(rng)}, {u(rng), u(rng)}}));
  }
  const auto scene = scene_of(groups);
  CameraConfig cam;
  cam.yaw = 2.0;
  const auto a = project_scene(scene, cam);
  const auto b = project_scene(scene, cam);
  CHECK(a == b);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(!occludes(a[i], a[i - 1]));
  for (const auto& x : a) {
    CHECK(x.x1 >= 0.0);
    CHECK(x.x2 <= cam.image_width);
    CHECK(x.y1 >= 0.0);
    CHECK(x.y2 <= cam.image_height);
    CHECK(x.rect().area() > 0.0);
  }
}

TEST_CASE("sample_camera") {
  const auto scene = scene_of({support::make_group("a", {{-1, 0}, {1, 0}})});
  CameraRanges r;
  CHECK(sample_camera(scene, r, 5) == sample_camera(scene, r, 5));
  r.distance = {17.5, 17.5};
  r.height = {2.25, 2.25};
  r.yaw = {0.5, 0.5};
  const auto cam = sample_camera(scene, r, 99);
  CHECK(cam.distance == 17.5);
  CHECK(cam.height == 2.25);
  CHECK(cam.yaw == 0.5);
  r.height = {3.0, 1.0};
  try {
    sample_camera(scene, r, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }

  CameraRanges wide;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto c = sample_camera(scene, wide, s);
    CHECK(c.distance >= 15.0);
    CHECK(c.distance <= 25.0);
    CHECK(c.height >= 1.5);
    CHECK(c.height <= 3.0);
  }
}

TEST_CASE("individual occlusion examples") {
  std::vector<BoundingBox> boxes{box("a", 0, 0, 10, 10, 5), box("b", 20, 20, 30, 30, 1)};
  CHECK(individual_occlusion(boxes, "a") == 0.0);
  CHECK(individual_non_occlusion(boxes, "a") == 1.0);

  boxes = {box("a", 0, 0, 10, 10, 5), box("b", 0, 0, 10, 10, 4)};
  CHECK(individual_occlusion(boxes, "a") == 1.0);
  CHECK(individual_occlusion(boxes, "b") == 0.0);

  boxes = {box("a", 0, 0, 10, 10, 5), box("b", 0, 0, 5, 10, 4)};
  CHECK(individual_occlusion(boxes, "a") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(oracle::raster_individual(boxes, 0) - 0.5) <= 1e-3);

  // a farther box never occludes; equal depths fall back to person_id order
  boxes = {box("a", 0, 0, 10, 10, 5), box("b", 0, 0, 5, 10, 6)};
  CHECK(individual_occlusion(boxes, "a") == 0.0);
  boxes = {box("b", 0, 0, 10, 10, 5), box("a", 0, 0, 5, 10, 5)};
  CHECK(individual_occlusion(boxes, "b") == doctest::Approx(0.5));
  CHECK(individual_occlusion(boxes, "a") == 0.0);

  try {
    individual_occlusion(boxes, "zz");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotFound);
  }
}

TEST_CASE("group occlusion examples") {
  std::vector<BoundingBox> boxes{box("a", 0, 0, 10, 10, 5)};
  std::vector<std::string> one{"a"};
  auto r = group_occlusion(boxes, one);
  CHECK(r.non_occlusion == 1.0);
  CHECK(r.occlusion == 0.0);

  boxes = {box("a", 0, 0, 10, 10, 5), box("b", 20, 0, 30, 10, 5), box("x", 19, -1, 31, 11, 1)};
  std::vector<std::string> ab{"a", "b"};
  r = group_occlusion(boxes, ab);
  CHECK(r.non_occlusion == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(oracle::raster_group_non_occlusion(boxes, {0, 1}) - 0.5) <= 2e-3);

  boxes = {box("a", 0, 0, 10, 10, 5), box("b", 5, 0, 15, 10, 5), box("x", -1, -1, 16, 11, 1)};
  r = group_occlusion(boxes, ab);
  CHECK(r.occlusion == 1.0);

  // members without a box are skipped; a group with no boxes has no rate
  std::vector<std::string> ghost{"a", "nobody"};
  CHECK(group_occlusion(boxes, ghost).occlusion == 1.0);
  std::vector<std::string> none{"nobody"};
  try {
    group_occlusion(boxes, none);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUndefinedRate);
  }
}

TEST_CASE("exact areas agree with rasterization") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto boxes = scenario::random_boxes(rng, t % 2 == 0);
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      CHECK(std::abs(individual_occlusion(boxes, boxes[k].person_id) - oracle::raster_individual(boxes, k, 400)) <=
            5e-3);
    }
  }
}

TEST_CASE("occlusion is monotone in the occluder set") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    auto boxes = scenario::random_boxes(rng, false);
    std::vector<double> before;
    for (const auto& b : boxes) before.push_back(individual_occlusion(boxes, b.person_id));
    auto extra = scenario::random_boxes(rng, false).front();
    extra.person_id = "zz";
    boxes.push_back(extra);
    for (std::size_t k = 0; k + 1 < boxes.size(); ++k) {
      CHECK(individual_occlusion(boxes, boxes[k].person_id) >= before[k]);
    }
  }
}

TEST_CASE("one-member groups and rate complements") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const auto boxes = scenario::random_boxes(rng, false);
    for (const auto& b : boxes) {
      std::vector<std::string> g{b.person_id};
      const auto r = group_occlusion(boxes, g);
      CHECK(r.non_occlusion == individual_non_occlusion(boxes, b.person_id));
      CHECK(std::abs(r.occlusion + r.non_occlusion - 1.0) <= 1e-12);
      const double oi = individual_occlusion(boxes, b.person_id);
      CHECK(std::abs(oi + individual_non_occlusion(boxes, b.person_id) - 1.0) <= 1e-12);
      CHECK(oi >= 0.0);
      CHECK(oi <= 1.0);
    }
  }
}

TEST_CASE("parallel occlusion statistics equal the serial reference") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 20; ++t) {
    const auto boxes = scenario::random_boxes(rng, t % 2 == 1);
    std::vector<std::vector<std::string>> groups{{boxes[0].person_id, boxes[1].person_id}};
    if (boxes.size() > 3) groups.push_back({boxes[2].person_id, boxes[3].person_id});
    groups.push_back({"absent"});
    const auto s = occlusion_stats_serial(boxes, groups);
    for (int w : {1, 3, 8}) {
      const auto p = occlusion_stats(boxes, groups, w);
      CHECK(p.person_ids == s.person_ids);
      CHECK(p.individual == s.individual);
      CHECK(p.group == s.group);
    }
    CHECK(!s.group.back().has_value());
  }
}
