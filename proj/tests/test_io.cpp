#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "fform/config.hpp"
#include "fform/error.hpp"
#include "fform/io.hpp"

using namespace fform;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("fform_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const GroupPool& fixture() {
  static const GroupPool pool = generate_fixture_pool(FixtureSpec{}, 7);
  return pool;
}

}  // namespace

TEST_CASE("pool CSV round-trip") {
  FixtureSpec spec;
  spec.scene_count = 2;
  const auto pool = generate_fixture_pool(spec, 3);
  std::istringstream in(serialize_pool(pool));
  const auto back = parse_pool_csv(in);
  REQUIRE(back.scenes.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(back.scenes[s].scene_id == pool.scenes[s].scene_id);
    CHECK(back.scenes[s].groups == pool.scenes[s].groups);
  }
}

TEST_CASE("pool CSV errors") {
  const std::string header = std::string(kPoolCsvHeader) + "\n";
  std::istringstream bad(header + "s,g,a,0,0,0,\ns,g,b,abc,0,0,\n");
  const auto msg = message_of([&] { parse_pool_csv(bad, "pool.csv"); });
  CHECK(msg.find("pool.csv:3") != std::string::npos);
  CHECK(msg.find("x_m") != std::string::npos);

  std::istringstream single(header + "s,lonely,a,0,0,0,\n");
  std::string text;
  try {
    parse_pool_csv(single);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
    text = e.what();
  }
  CHECK(text.find("lonely") != std::string::npos);

  std::istringstream short_row(header + "s,g,a,0,0\n");
  CHECK(kind_of([&] { parse_pool_csv(short_row); }) == ErrorKind::kParse);
  std::istringstream wrong_header("a,b,c\n");
  CHECK(kind_of([&] { parse_pool_csv(wrong_header); }) == ErrorKind::kParse);

  std::istringstream wrapped(header + "s,g,a,0,0,-1.5,\ns,g,b,1,0,7,0.5\n");
  const auto pool = parse_pool_csv(wrapped);
  const auto& m = pool.scenes[0].groups[0].members;
  CHECK(m[0].body_orientation == doctest::Approx(kTwoPi - 1.5));
  CHECK(m[1].body_orientation == doctest::Approx(7.0 - kTwoPi));
  CHECK(!m[0].head_orientation.has_value());
  CHECK(*m[1].head_orientation == 0.5);

  CHECK(kind_of([] { load_pool("/nonexistent/pool.csv"); }) == ErrorKind::kIo);
}

TEST_CASE("fixture pool geometry") {
  FixtureSpec spec;
  spec.scene_count = 1;
  spec.min_groups_per_scene = spec.max_groups_per_scene = 1;
  spec.min_members = spec.max_members = 4;
  spec.min_radius = spec.max_radius = 0.6;
  const auto pool = generate_fixture_pool(spec, 11);
  const auto& g = pool.scenes[0].groups[0];
  REQUIRE(g.members.size() == 4);
  const auto s = summarize_group(g);
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec2 rel = g.members[k].position - s.mu;
    CHECK(norm(rel) == doctest::Approx(0.6).epsilon(1e-12));
    const Vec2 next = g.members[(k + 1) % 4].position - s.mu;
    CHECK(std::abs(dot(rel, next)) < 1e-12);
    const Vec2 facing{std::cos(g.members[k].body_orientation), std::sin(g.members[k].body_orientation)};
    CHECK(dot(facing, rel * (-1.0 / 0.6)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(s.sigma.xx == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(s.sigma.yy == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(std::abs(s.sigma.xy) < 1e-12);

  for (const auto& scene : fixture().scenes) {
    for (const auto& grp : scene.groups) {
      const auto sum = summarize_group(grp);
      const double r = norm(grp.members[0].position - sum.mu);
      CHECK(sum.sigma.xx == doctest::Approx(r * r / 2.0).epsilon(1e-9));
      CHECK(sum.sigma.yy == doctest::Approx(r * r / 2.0).epsilon(1e-9));
    }
  }

  CHECK(serialize_pool(generate_fixture_pool(FixtureSpec{}, 5)) ==
        serialize_pool(generate_fixture_pool(FixtureSpec{}, 5)));
  spec.min_members = 1;
  CHECK(kind_of([&] { generate_fixture_pool(spec, 1); }) == ErrorKind::kSpec);
}

TEST_CASE("scene JSON round-trip and schema gate") {
  const auto scenes = synthesize_batch(fixture(), SceneConfig{}, 3, 1, 1);
  const auto text = serialize_scenes(scenes);
  CHECK(parse_scenes(text) == scenes);
  CHECK(serialize_scenes(parse_scenes(text)) == text);

  auto doc = nlohmann::json::parse(text);
  doc["schema_version"] = "99";
  CHECK(kind_of([&] { parse_scenes(doc.dump()); }) == ErrorKind::kSchemaVersion);
  doc.erase("schema_version");
  CHECK(kind_of([&] { parse_scenes(doc.dump()); }) == ErrorKind::kSchemaVersion);
  CHECK(kind_of([] { parse_scenes("{not json"); }) == ErrorKind::kParse);
}

TEST_CASE("hand-written minimal scene parses to the expected value") {
  const std::string golden = R"({
    "schema_version": "1", "kind": "scenes",
    "scenes": [{
      "scene_id": "mini",
      "placement": {"r_d": 2.0},
      "groups": [{"group_id": "g0", "members": [
        {"person_id": "a", "position": [-1.0, 0.0], "body_orientation": 0.0, "head_orientation": null},
        {"person_id": "b", "position": [1.0, 0.0], "body_orientation": 3.0, "head_orientation": 3.5}]}],
      "provenance": [{"pool_scene_id": "p", "source_group_id": "x", "rotation": 0.0, "translation": [0.0, 0.0]}],
      "constraint_report": [{"group_index": 0, "converged": true, "iterations": 0, "final_loss": 0.0,
                             "residuals": []}]
    }]})";
  SceneGeometry expect;
  expect.scene_id = "mini";
  expect.placement.r_d = 2.0;
  expect.groups.push_back({"g0", {{"a", {-1, 0}, 0.0, std::nullopt}, {"b", {1, 0}, 3.0, 3.5}}});
  expect.provenance.push_back({"p", "x", 0.0, {0, 0}});
  expect.constraint_report.push_back({0, true, 0, 0.0, {}});
  const auto got = parse_scenes(golden);
  REQUIRE(got.size() == 1);
  CHECK(got[0] == expect);
}

TEST_CASE("annotation JSON round-trip, validation and golden record") {
  const auto scenes = synthesize_batch(fixture(), SceneConfig{}, 4, 2, 1);
  const auto records = annotate_batch(scenes, CameraRanges{}, 6, 2);
  const auto text = serialize_annotations(records);
  CHECK(parse_annotations(text) == records);
  for (const auto& r : records) {
    for (const auto& g : r.groups) CHECK(!g.empty());
  }

  const std::string golden = R"({"schema_version": "1", "kind": "annotations", "records": [{
      "scene_id": "one", "camera": {"distance": 20.0},
      "persons": [{"person_id": "a", "box": [10, 20, 30, 80], "depth": 19.5, "ground": [0.5, 0.0]},
                  {"person_id": "b", "box": [25, 20, 45, 80], "depth": 20.5, "ground": [-0.5, 0.0]}],
      "groups": [["a", "b"]]}]})";
  const auto got = parse_annotations(golden);
  REQUIRE(got.size() == 1);
  CHECK(got[0].camera.distance == 20.0);
  CHECK(got[0].camera.focal_length == CameraConfig{}.focal_length);
  CHECK(got[0].persons[1].box == BoundingBox{"b", 25, 20, 45, 80, 20.5});
  CHECK(got[0].groups == std::vector<std::vector<std::string>>{{"a", "b"}});

  auto doc = nlohmann::json::parse(golden);
  doc["records"][0]["groups"][0].push_back("ghost");
  const auto msg = message_of([&] { parse_annotations(doc.dump()); });
  CHECK(msg.find("records[0]") != std::string::npos);
  CHECK(msg.find("ghost") != std::string::npos);
}

TEST_CASE("partition files and affinity CSV") {
  TempDir tmp;
  std::vector<PartitionFrame> frames{{"f1", GroupPartition{{{"a", "b"}, {"c"}}}}, {"f2", GroupPartition{}}};
  write_partitions(frames, tmp.path / "p.json");
  const auto back = read_partitions(tmp.path / "p.json");
  REQUIRE(back.size() == 2);
  CHECK(back[0].frame_id == "f1");
  CHECK(back[0].partition == frames[0].partition);

  std::istringstream csv("a,b,c\n1,0.9,0\n0.9,1,0.2\n0,0.2,1\n");
  const auto m = parse_affinity_csv(csv);
  CHECK(m.ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(m.at(1, 2) == 0.2);
  std::istringstream ragged("a,b\n1,0.5\n0.5\n");
  const auto msg = message_of([&] { parse_affinity_csv(ragged, "m.csv"); });
  CHECK(msg.find("m.csv:3") != std::string::npos);
}

TEST_CASE("stats_report totals match direct recomputation") {
  TempDir tmp;
  // 10 scenes of 12 people each, 4 groups of 3
  std::vector<AnnotationRecord> hand;
  for (int s = 0; s < 10; ++s) {
    AnnotationRecord r;
    r.scene_id = "h" + std::to_string(s);
    for (int k = 0; k < 12; ++k) {
      const std::string id = "p" + std::to_string(k);
      r.persons.push_back({{id, 10.0 * k, 0.0, 10.0 * k + 15.0, 40.0, 1.0 + k}, {0.0, 0.0}});
    }
    for (int g = 0; g < 4; ++g) {
      r.groups.push_back({"p" + std::to_string(3 * g), "p" + std::to_string(3 * g + 1), "p" + std::to_string(3 * g + 2)});
    }
    hand.push_back(r);
  }
  write_annotations(hand, tmp.path / "hand.json");
  const std::vector<fs::path> paths{tmp.path / "hand.json"};
  const auto m = stats_report(paths, tmp.path / "out", 2);
  CHECK(m.scene_count == 10);
  CHECK(m.person_count == 120);
  CHECK(m.group_count == 40);
  CHECK(m.people_per_scene.at(12) == 10);

  const auto scenes = synthesize_batch(fixture(), SceneConfig{}, 12, 3, 1);
  const auto records = annotate_batch(scenes, CameraRanges{}, 4, 1);
  write_annotations(records, tmp.path / "syn.json");
  std::vector<SplitInput> splits{{"train", {tmp.path / "syn.json"}}, {"test", {tmp.path / "hand.json"}}};
  const auto all = stats_report(splits, tmp.path / "out2", 1);
  REQUIRE(all.size() == 3);
  CHECK(all[2].split == "all");

  std::size_t people = 0;
  std::size_t groups = 0;
  std::array<std::size_t, 10> ind{};
  std::array<std::size_t, 10> grp{};
  for (const auto& r : records) {
    people += r.persons.size();
    const auto boxes = r.boxes();
    for (const auto& b : boxes) {
      ind[std::min<std::size_t>(static_cast<std::size_t>(individual_occlusion(boxes, b.person_id) * 10.0), 9)]++;
    }
    for (const auto& g : r.groups) {
      if (g.size() < 2) continue;
      ++groups;
      grp[std::min<std::size_t>(static_cast<std::size_t>(group_occlusion(boxes, g).occlusion * 10.0), 9)]++;
    }
  }
  CHECK(all[0].person_count == people);
  CHECK(all[0].group_count == groups);
  CHECK(all[0].individual_occlusion == ind);
  CHECK(all[0].group_occlusion == grp);
  std::size_t hist_people = 0;
  for (auto c : all[2].individual_occlusion) hist_people += c;
  CHECK(hist_people == all[2].person_count);
  CHECK(all[2].person_count == people + 120);

  const auto manifest = nlohmann::json::parse(read_text(tmp.path / "out2" / "manifest.json"));
  CHECK(manifest["kind"] == "manifest");
  CHECK(manifest["splits"][2]["scene_count"] == 22);
  const auto table = read_text(tmp.path / "out2" / "table1.csv");
  CHECK(table.find("Number of image,12,10,22") != std::string::npos);
  CHECK(fs::exists(tmp.path / "out2" / "people_per_scene.csv"));
  CHECK(fs::exists(tmp.path / "out2" / "individual_occlusion.csv"));
  CHECK(fs::exists(tmp.path / "out2" / "group_occlusion.csv"));

  std::vector<SplitInput> none{{"x", {}}};
  CHECK(kind_of([&] { stats_report(none, tmp.path / "out3", 1); }) == ErrorKind::kEmptyDataset);
}

TEST_CASE("annotate keeps only visible group members") {
  auto scene = synthesize_scene(fixture(), SceneConfig{}, 12, "s");
  CameraConfig cam;
  cam.image_width = 200;  // narrow image clips most people
  const auto rec = annotate(scene, cam);
  std::set<std::string> boxed;
  for (const auto& p : rec.persons) boxed.insert(p.box.person_id);
  for (const auto& g : rec.groups) {
    CHECK(!g.empty());
    for (const auto& id : g) CHECK(boxed.count(id) == 1);
  }
  CHECK_NOTHROW(rec.validate());
}

TEST_CASE("annotate_batch is independent of the worker count") {
  const auto scenes = synthesize_batch(fixture(), SceneConfig{}, 10, 8, 1);
  CHECK(serialize_annotations(annotate_batch(scenes, CameraRanges{}, 3, 1)) ==
        serialize_annotations(annotate_batch(scenes, CameraRanges{}, 3, 8)));
}

TEST_CASE("config overrides") {
  const ToolConfig base;
  CHECK(base.scene.placement.beta == 0.4);
  CHECK(base.scene.placement.gamma == 2.0);
  CHECK(base.scene.placement.learning_rate == 5e-2);
  const auto cfg = apply_overrides(
      base, R"({"placement": {"theta": 0.2, "third_term_mode": "objective2_consistent", "r_d": 3},
               "scene": {"group_count_range": [2, 4], "pool_sampling": "uniform_without_replacement"},
               "camera": {"distance": [10, 12], "fixed": {"image_size": [640, 480]}}})");
  CHECK(cfg.scene.placement.theta == 0.2);
  CHECK(cfg.scene.placement.third_term_mode == ThirdTermMode::kPenalizeFar);
  CHECK(*cfg.scene.placement.r_d == 3.0);
  CHECK(cfg.scene.min_groups == 2);
  CHECK(cfg.scene.pool_sampling == PoolSampling::kWithoutReplacement);
  CHECK(cfg.camera.distance.hi == 12.0);
  CHECK(cfg.camera.fixed.image_width == 640);
  CHECK(cfg.scene.placement.beta == 0.4);

  const auto again = apply_overrides(ToolConfig{}, to_json_text(cfg));
  CHECK(to_json_text(again) == to_json_text(cfg));

  for (const char* bad : {R"({"placement": {"bogus": 1}})", R"({"scene": {"group_count_range": [5, 2]}})",
                          R"({"placement": {"distance_mode": "manhattan"}})", R"({"extra": 1})", "[1]", "{"}) {
    CHECK(kind_of([&] { apply_overrides(base, bad); }) == ErrorKind::kConfig);
  }
}
