#include "fform/io.hpp"

#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "fform/error.hpp"
#include "json_codec.hpp"

namespace fform {

using codec::json;

// ---- text files ----

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open '" + tmp.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

// ---- group pool ----

GroupPool parse_pool_csv(std::istream& in, const std::string& source) {
  static const std::vector<std::string> kColumns = split_csv(kPoolCsvHeader);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  GroupPool pool;
  std::unordered_map<std::string, std::size_t> scene_index;
  std::vector<std::unordered_map<std::string, std::size_t>> group_index;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (!header_seen) {
      if (fields != kColumns) {
        throw Error(ErrorKind::kParse, where + ": expected header '" + std::string(kPoolCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != kColumns.size()) {
      throw Error(ErrorKind::kParse, where + ": expected " + std::to_string(kColumns.size()) + " fields, found " +
                                         std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < 3; ++c) {
      if (fields[c].empty()) throw Error(ErrorKind::kParse, where + ": field '" + kColumns[c] + "' is empty");
    }
    double values[4] = {};
    for (std::size_t c = 3; c < 6; ++c) {
      if (!parse_number(fields[c], values[c - 3])) {
        throw Error(ErrorKind::kParse,
                    where + ": field '" + kColumns[c] + "' is not a finite number ('" + fields[c] + "')");
      }
    }
    PersonPose pose;
    pose.person_id = fields[2];
    pose.position = {values[0], values[1]};
    pose.body_orientation = normalize_angle(values[2]);
    if (!fields[6].empty()) {
      if (!parse_number(fields[6], values[3])) {
        throw Error(ErrorKind::kParse,
                    where + ": field '" + kColumns[6] + "' is not a finite number ('" + fields[6] + "')");
      }
      pose.head_orientation = normalize_angle(values[3]);
    }

    auto [sit, new_scene] = scene_index.try_emplace(fields[0], pool.scenes.size());
    if (new_scene) {
      pool.scenes.push_back({fields[0], {}});
      group_index.emplace_back();
    }
    auto& scene = pool.scenes[sit->second];
    auto [git, new_group] = group_index[sit->second].try_emplace(fields[1], scene.groups.size());
    if (new_group) scene.groups.push_back({fields[1], {}});
    auto& group = scene.groups[git->second];
    for (const auto& m : group.members) {
      if (m.person_id == pose.person_id) {
        throw Error(ErrorKind::kValidation, where + ": person '" + pose.person_id + "' repeated in group '" +
                                                fields[1] + "' of scene '" + fields[0] + "'");
      }
    }
    group.members.push_back(std::move(pose));
  }
  if (!header_seen) throw Error(ErrorKind::kParse, source + ": missing header row");
  if (pool.scenes.empty()) throw Error(ErrorKind::kValidation, source + ": pool has no rows");

  std::string singletons;
  for (const auto& s : pool.scenes) {
    for (const auto& g : s.groups) {
      if (g.members.size() < 2) singletons += " " + s.scene_id + "/" + g.group_id;
    }
  }
  if (!singletons.empty()) {
    throw Error(ErrorKind::kValidation, source + ": groups with fewer than 2 people are not allowed:" + singletons);
  }
  validate_pool(pool);
  return pool;
}

GroupPool load_pool(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  return parse_pool_csv(in, path.string());
}

std::string serialize_pool(const GroupPool& pool) {
  std::string out = std::string(kPoolCsvHeader) + "\n";
  for (const auto& s : pool.scenes) {
    for (const auto& g : s.groups) {
      for (const auto& m : g.members) {
        out += s.scene_id + "," + g.group_id + "," + m.person_id + "," + format_double(m.position.x) + "," +
               format_double(m.position.y) + "," + format_double(m.body_orientation) + "," +
               (m.head_orientation ? format_double(*m.head_orientation) : std::string()) + "\n";
      }
    }
  }
  return out;
}

void write_pool(const GroupPool& pool, const std::filesystem::path& path) {
  write_text_atomic(path, serialize_pool(pool));
}

// ---- fixture pool ----

void FixtureSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kSpec, "fixture: " + what); };
  if (scene_count < 1) fail("scene_count must be >= 1");
  if (min_groups_per_scene < 1 || min_groups_per_scene > max_groups_per_scene) {
    fail("groups per scene must satisfy 1 <= min <= max");
  }
  if (min_members < 2) fail("member count must be >= 2");
  if (min_members > max_members) fail("min_members must be <= max_members");
  if (!(min_radius > 0.0) || min_radius > max_radius) fail("radius range must satisfy 0 < min <= max");
  if (!(radius_jitter >= 0.0 && radius_jitter < 1.0)) fail("radius_jitter must lie in [0, 1)");
  if (!(scene_extent >= 0.0) || !(min_center_spacing >= 0.0)) fail("extent and spacing must be >= 0");
}

GroupPool generate_fixture_pool(const FixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  GroupPool pool;
  for (int s = 0; s < spec.scene_count; ++s) {
    PoolScene scene{"fx" + std::to_string(s), {}};
    const int groups = uniform_int(spec.min_groups_per_scene, spec.max_groups_per_scene);
    std::vector<Vec2> centers;
    for (int g = 0; g < groups; ++g) {
      Vec2 c;
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        c = {uniform(-0.5, 0.5) * spec.scene_extent, uniform(-0.5, 0.5) * spec.scene_extent};
        placed = true;
        for (const auto& o : centers) {
          if (norm(c - o) < spec.min_center_spacing) placed = false;
        }
      }
      if (!placed) {
        throw Error(ErrorKind::kSpec, "fixture: cannot fit " + std::to_string(groups) + " groups with spacing " +
                                          format_double(spec.min_center_spacing) + " in extent " +
                                          format_double(spec.scene_extent));
      }
      centers.push_back(c);

      const int members = uniform_int(spec.min_members, spec.max_members);
      const double radius = uniform(spec.min_radius, spec.max_radius);
      const double phase = uniform(0.0, kTwoPi);
      GroupGeometry group{"g" + std::to_string(g), {}};
      for (int k = 0; k < members; ++k) {
        const double angle = phase + kTwoPi * k / members;
        const double r = spec.radius_jitter > 0.0
                             ? radius * (1.0 + uniform(-spec.radius_jitter, spec.radius_jitter))
                             : radius;
        PersonPose p;
        p.person_id = "s" + std::to_string(s) + "g" + std::to_string(g) + "p" + std::to_string(k);
        p.position = c + Vec2{r * std::cos(angle), r * std::sin(angle)};
        p.body_orientation = normalize_angle(angle + std::numbers::pi);
        p.head_orientation = p.body_orientation;
        group.members.push_back(std::move(p));
      }
      scene.groups.push_back(std::move(group));
    }
    pool.scenes.push_back(std::move(scene));
  }
  return pool;
}

// ---- JSON helpers ----

namespace {

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorKind::kParse, where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json parse_document(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kParse, "document root must be an object");
  const auto v = j.find("schema_version");
  if (v == j.end()) throw Error(ErrorKind::kSchemaVersion, "document has no schema_version");
  const std::string version = v->is_string() ? v->get<std::string>() : v->dump();
  if (version != kSchemaVersion) {
    throw Error(ErrorKind::kSchemaVersion, "schema_version '" + version + "' is not supported (expected '" +
                                               kSchemaVersion + "')");
  }
  if (kind != nullptr) {
    const auto k = codec::get<std::string>(j, "kind", "document");
    if (k != kind) throw Error(ErrorKind::kParse, "expected a '" + std::string(kind) + "' document, found '" + k + "'");
  }
  return j;
}

json person_json(const PersonPose& p) {
  return json{{"person_id", p.person_id},
              {"position", vec_json(p.position)},
              {"body_orientation", p.body_orientation},
              {"head_orientation", p.head_orientation ? json(*p.head_orientation) : json(nullptr)}};
}

PersonPose person_from(const json& j, const std::string& where) {
  PersonPose p;
  p.person_id = codec::get<std::string>(j, "person_id", where);
  p.position = vec_from(j.at("position"), where + ".position");
  p.body_orientation = codec::get<double>(j, "body_orientation", where);
  if (const auto it = j.find("head_orientation"); it != j.end() && !it->is_null()) {
    p.head_orientation = codec::get<double>(j, "head_orientation", where);
  }
  return p;
}

PlacementParams placement_from(const json& j, const std::string& where) {
  PlacementParams p;
  try {
    codec::overlay(j, p, where);
  } catch (const Error& e) {
    throw Error(ErrorKind::kParse, e.what());
  }
  return p;
}

CameraConfig camera_from(const json& j, const std::string& where) {
  CameraConfig c;
  try {
    codec::overlay(j, c, where);
  } catch (const Error& e) {
    throw Error(ErrorKind::kParse, e.what());
  }
  return c;
}

template <typename F>
auto with_context(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, where + ": " + e.what());
  }
}

}  // namespace

// ---- scenes ----

std::string serialize_scenes(std::span<const SceneGeometry> scenes) {
  json arr = json::array();
  for (const auto& s : scenes) {
    json groups = json::array();
    for (const auto& g : s.groups) {
      json members = json::array();
      for (const auto& m : g.members) members.push_back(person_json(m));
      groups.push_back(json{{"group_id", g.group_id}, {"members", members}});
    }
    json provenance = json::array();
    for (const auto& p : s.provenance) {
      provenance.push_back(json{{"pool_scene_id", p.pool_scene_id},
                                {"source_group_id", p.source_group_id},
                                {"rotation", p.rotation},
                                {"translation", vec_json(p.translation)}});
    }
    json report = json::array();
    for (const auto& r : s.constraint_report) {
      report.push_back(json{{"group_index", r.group_index},
                            {"converged", r.converged},
                            {"iterations", r.iterations},
                            {"final_loss", r.final_loss},
                            {"residuals", r.residuals}});
    }
    arr.push_back(json{{"scene_id", s.scene_id},
                       {"placement", codec::to_json(s.placement)},
                       {"groups", groups},
                       {"provenance", provenance},
                       {"constraint_report", report}});
  }
  return json{{"schema_version", kSchemaVersion}, {"kind", "scenes"}, {"scenes", arr}}.dump() + "\n";
}

std::vector<SceneGeometry> parse_scenes(const std::string& text) {
  const json doc = parse_document(text, "scenes");
  std::vector<SceneGeometry> out;
  const auto& arr = doc.at("scenes");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "scenes[" + std::to_string(i) + "]";
    out.push_back(with_context(where, [&] {
      const json& s = arr[i];
      SceneGeometry scene;
      scene.scene_id = codec::get<std::string>(s, "scene_id", where);
      scene.placement = placement_from(s.at("placement"), where + ".placement");
      for (const auto& g : s.at("groups")) {
        GroupGeometry group{codec::get<std::string>(g, "group_id", where), {}};
        for (const auto& m : g.at("members")) group.members.push_back(person_from(m, where));
        scene.groups.push_back(std::move(group));
      }
      for (const auto& p : s.at("provenance")) {
        scene.provenance.push_back({codec::get<std::string>(p, "pool_scene_id", where),
                                    codec::get<std::string>(p, "source_group_id", where),
                                    codec::get<double>(p, "rotation", where),
                                    vec_from(p.at("translation"), where + ".translation")});
      }
      for (const auto& r : s.at("constraint_report")) {
        scene.constraint_report.push_back({codec::get<int>(r, "group_index", where),
                                           codec::get<bool>(r, "converged", where),
                                           codec::get<int>(r, "iterations", where),
                                           codec::get<double>(r, "final_loss", where),
                                           codec::get<std::vector<double>>(r, "residuals", where)});
      }
      std::set<std::string> ids;
      for (const auto& g : scene.groups) {
        try {
          validate_group(g);
        } catch (const Error& e) {
          throw Error(ErrorKind::kValidation, where + ": " + e.what());
        }
        for (const auto& m : g.members) {
          if (!ids.insert(m.person_id).second) {
            throw Error(ErrorKind::kValidation, where + ": person id '" + m.person_id + "' is not unique");
          }
        }
      }
      return scene;
    }));
  }
  return out;
}

void write_scenes(std::span<const SceneGeometry> scenes, const std::filesystem::path& path) {
  write_text_atomic(path, serialize_scenes(scenes));
}

std::vector<SceneGeometry> read_scenes(const std::filesystem::path& path) {
  try {
    return parse_scenes(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

// ---- annotations ----

void AnnotationRecord::validate() const {
  std::set<std::string> ids;
  for (const auto& p : persons) {
    const auto& b = p.box;
    if (!(b.x1 < b.x2 && b.y1 < b.y2) || !std::isfinite(b.depth)) {
      throw Error(ErrorKind::kValidation, "scene '" + scene_id + "': box of '" + b.person_id + "' is empty");
    }
    if (!ids.insert(b.person_id).second) {
      throw Error(ErrorKind::kValidation, "scene '" + scene_id + "': person '" + b.person_id + "' listed twice");
    }
  }
  std::set<std::string> grouped;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorKind::kValidation, "scene '" + scene_id + "': empty group");
    for (const auto& id : g) {
      if (!ids.contains(id)) {
        throw Error(ErrorKind::kValidation, "scene '" + scene_id + "': grouped person '" + id + "' has no box");
      }
      if (!grouped.insert(id).second) {
        throw Error(ErrorKind::kValidation, "scene '" + scene_id + "': person '" + id + "' is in two groups");
      }
    }
  }
}

std::vector<BoundingBox> AnnotationRecord::boxes() const {
  std::vector<BoundingBox> out;
  out.reserve(persons.size());
  for (const auto& p : persons) out.push_back(p.box);
  return out;
}

AnnotationRecord annotate(const SceneGeometry& scene, const CameraConfig& cam) {
  AnnotationRecord rec;
  rec.scene_id = scene.scene_id;
  rec.camera = cam;
  const auto boxes = project_scene(scene, cam);
  std::unordered_map<std::string, Vec2> ground;
  for (const auto& g : scene.groups) {
    for (const auto& m : g.members) ground.emplace(m.person_id, m.position);
  }
  std::set<std::string> visible;
  for (const auto& b : boxes) {
    rec.persons.push_back({b, ground.at(b.person_id)});
    visible.insert(b.person_id);
  }
  for (const auto& g : scene.groups) {
    std::vector<std::string> ids;
    for (const auto& m : g.members) {
      if (visible.contains(m.person_id)) ids.push_back(m.person_id);
    }
    if (!ids.empty()) rec.groups.push_back(std::move(ids));
  }
  return rec;
}

std::vector<AnnotationRecord> annotate_batch(std::span<const SceneGeometry> scenes, const CameraRanges& ranges,
                                             std::uint64_t master_seed, int workers) {
  if (workers < 1) throw Error(ErrorKind::kParameter, "workers must be >= 1");
  // camera streams are kept apart from the synthesis streams of the same seed
  const std::uint64_t camera_master = derive_scene_seed(master_seed, 0xCA3E8AULL);
  std::vector<AnnotationRecord> out(scenes.size());
  std::vector<std::exception_ptr> errors(scenes.size());
  const auto n = static_cast<std::int64_t>(scenes.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      const CameraConfig cam = sample_camera(scenes[i], ranges, derive_scene_seed(camera_master, i));
      out[i] = annotate(scenes[i], cam);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string serialize_annotations(std::span<const AnnotationRecord> records) {
  json arr = json::array();
  for (const auto& r : records) {
    json persons = json::array();
    for (const auto& p : r.persons) {
      persons.push_back(json{{"person_id", p.box.person_id},
                             {"box", {p.box.x1, p.box.y1, p.box.x2, p.box.y2}},
                             {"depth", p.box.depth},
                             {"ground", vec_json(p.ground)}});
    }
    arr.push_back(json{{"scene_id", r.scene_id},
                       {"camera", codec::to_json(r.camera)},
                       {"persons", persons},
                       {"groups", r.groups}});
  }
  return json{{"schema_version", kSchemaVersion}, {"kind", "annotations"}, {"records", arr}}.dump() + "\n";
}

namespace {

std::vector<AnnotationRecord> annotations_from(const json& doc) {
  std::vector<AnnotationRecord> out;
  const auto& arr = doc.at("records");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "records[" + std::to_string(i) + "]";
    out.push_back(with_context(where, [&] {
      const json& r = arr[i];
      AnnotationRecord rec;
      rec.scene_id = codec::get<std::string>(r, "scene_id", where);
      rec.camera = camera_from(r.at("camera"), where + ".camera");
      for (const auto& p : r.at("persons")) {
        AnnotatedPerson ap;
        ap.box.person_id = codec::get<std::string>(p, "person_id", where);
        const auto box = codec::get<std::vector<double>>(p, "box", where);
        if (box.size() != 4) throw Error(ErrorKind::kParse, where + ": box must be [x1, y1, x2, y2]");
        ap.box.x1 = box[0];
        ap.box.y1 = box[1];
        ap.box.x2 = box[2];
        ap.box.y2 = box[3];
        ap.box.depth = codec::get<double>(p, "depth", where);
        ap.ground = vec_from(p.at("ground"), where + ".ground");
        rec.persons.push_back(std::move(ap));
      }
      rec.groups = codec::get<std::vector<std::vector<std::string>>>(r, "groups", where);
      try {
        rec.validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::kValidation, where + ": " + e.what());
      }
      return rec;
    }));
  }
  return out;
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(const std::string& text) {
  return annotations_from(parse_document(text, "annotations"));
}

void write_annotations(std::span<const AnnotationRecord> records, const std::filesystem::path& path) {
  write_text_atomic(path, serialize_annotations(records));
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  try {
    return parse_annotations(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

// ---- partitions and affinities ----

std::vector<PartitionFrame> read_partitions(const std::filesystem::path& path) {
  try {
    const json doc = parse_document(read_text(path), nullptr);
    const auto kind = codec::get<std::string>(doc, "kind", "document");
    std::vector<PartitionFrame> out;
    if (kind == "annotations") {
      for (auto& rec : annotations_from(doc)) {
        PartitionFrame f{rec.scene_id, {std::move(rec.groups)}};
        f.partition.canonicalize();
        out.push_back(std::move(f));
      }
      return out;
    }
    if (kind != "partitions") throw Error(ErrorKind::kParse, "expected a partitions or annotations document");
    const auto& frames = doc.at("frames");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string where = "frames[" + std::to_string(i) + "]";
      PartitionFrame f;
      f.frame_id = codec::get<std::string>(frames[i], "frame_id", where);
      f.partition.groups = codec::get<std::vector<std::vector<std::string>>>(frames[i], "groups", where);
      try {
        f.partition.validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::kValidation, where + ": " + e.what());
      }
      f.partition.canonicalize();
      out.push_back(std::move(f));
    }
    return out;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

void write_partitions(std::span<const PartitionFrame> frames, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& f : frames) arr.push_back(json{{"frame_id", f.frame_id}, {"groups", f.partition.groups}});
  write_text_atomic(path,
                    json{{"schema_version", kSchemaVersion}, {"kind", "partitions"}, {"frames", arr}}.dump(2) + "\n");
}

AffinityMatrix parse_affinity_csv(std::istream& in, const std::string& source) {
  AffinityMatrix m;
  std::string line;
  std::size_t line_no = 0;
  bool have_ids = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (!have_ids) {
      m.ids = fields;
      have_ids = true;
      continue;
    }
    if (fields.size() != m.ids.size()) {
      throw Error(ErrorKind::kParse, where + ": expected " + std::to_string(m.ids.size()) + " values, found " +
                                         std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_number(f, v)) throw Error(ErrorKind::kParse, where + ": '" + f + "' is not a finite number");
      m.values.push_back(v);
    }
  }
  if (!have_ids) throw Error(ErrorKind::kParse, source + ": missing id row");
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kValidation, source + ": " + e.what());
  }
  return m;
}

AffinityMatrix read_affinity_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  return parse_affinity_csv(in, path.string());
}

std::string score_report_json(const ScoreReport& report, std::span<const std::pair<std::string, ScoreReport>> frames) {
  auto one = [](const ScoreReport& r) {
    json matches = json::array();
    for (const auto& [g, p] : r.matches) matches.push_back({g, p});
    return json{{"precision", r.precision},   {"recall", r.recall},       {"f1", r.f1},
                {"tolerance", r.tolerance},   {"gt_groups", r.gt_groups}, {"pred_groups", r.pred_groups},
                {"vacuous", r.vacuous},       {"matches", matches}};
  };
  json per_frame = json::array();
  for (const auto& [id, r] : frames) {
    json f = one(r);
    f["frame_id"] = id;
    per_frame.push_back(f);
  }
  json overall = one(report);
  overall.erase("matches");
  return json{{"schema_version", kSchemaVersion}, {"kind", "score_report"}, {"overall", overall}, {"frames", per_frame}}
             .dump(2) +
         "\n";
}

// ---- statistics ----

std::size_t decile(double rate) {
  const double clamped = std::clamp(rate, 0.0, 1.0);
  return std::min<std::size_t>(static_cast<std::size_t>(clamped * 10.0), 9);
}

DatasetManifest compute_manifest(const std::string& split, std::span<const AnnotationRecord> records, int workers) {
  DatasetManifest m;
  m.split = split;
  for (const auto& rec : records) {
    ++m.scene_count;
    m.person_count += rec.persons.size();
    ++m.people_per_scene[rec.persons.size()];
    std::vector<std::vector<std::string>> counted;
    for (const auto& g : rec.groups) {
      if (g.size() >= 2) counted.push_back(g);
    }
    m.group_count += counted.size();
    const auto boxes = rec.boxes();
    const OcclusionStats stats = occlusion_stats(boxes, counted, workers);
    for (double o : stats.individual) ++m.individual_occlusion[decile(o)];
    for (const auto& o : stats.group) {
      // counted groups have >= 2 boxed members, so the rate is always defined
      ++m.group_occlusion[decile(o.value_or(0.0))];
    }
  }
  return m;
}

namespace {

DatasetManifest merge(const std::string& name, std::span<const DatasetManifest> parts) {
  DatasetManifest all;
  all.split = name;
  for (const auto& p : parts) {
    all.scene_count += p.scene_count;
    all.person_count += p.person_count;
    all.group_count += p.group_count;
    for (const auto& [k, v] : p.people_per_scene) all.people_per_scene[k] += v;
    for (std::size_t i = 0; i < 10; ++i) {
      all.individual_occlusion[i] += p.individual_occlusion[i];
      all.group_occlusion[i] += p.group_occlusion[i];
    }
  }
  return all;
}

std::string decile_label(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f,%.1f", i / 10.0, (i + 1) / 10.0);
  return buf;
}

}  // namespace

std::vector<DatasetManifest> stats_report(std::span<const SplitInput> splits, const std::filesystem::path& out_dir,
                                          int workers) {
  std::vector<DatasetManifest> manifests;
  for (const auto& s : splits) {
    std::vector<AnnotationRecord> records;
    for (const auto& p : s.paths) {
      auto part = read_annotations(p);
      records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    manifests.push_back(compute_manifest(s.name, records, workers));
  }
  const DatasetManifest total = merge("all", manifests);
  if (total.scene_count == 0) throw Error(ErrorKind::kEmptyDataset, "no annotated scenes in the input set");
  if (manifests.size() > 1) manifests.push_back(total);

  json jsplits = json::array();
  for (const auto& m : manifests) {
    json pps = json::object();
    for (const auto& [k, v] : m.people_per_scene) pps[std::to_string(k)] = v;
    jsplits.push_back(json{{"split", m.split},
                           {"scene_count", m.scene_count},
                           {"person_count", m.person_count},
                           {"group_count", m.group_count},
                           {"people_per_scene", pps},
                           {"individual_occlusion_deciles", m.individual_occlusion},
                           {"group_occlusion_deciles", m.group_occlusion}});
  }
  write_text_atomic(out_dir / "manifest.json",
                    json{{"schema_version", kSchemaVersion}, {"kind", "manifest"}, {"splits", jsplits}}.dump(2) + "\n");

  std::string header = "#";
  for (const auto& m : manifests) header += "," + m.split;
  header += "\n";

  std::string table = header;
  auto row = [&](const char* label, auto field) {
    table += label;
    for (const auto& m : manifests) table += "," + std::to_string(field(m));
    table += "\n";
  };
  row("Number of image", [](const DatasetManifest& m) { return m.scene_count; });
  row("Number of people", [](const DatasetManifest& m) { return m.person_count; });
  row("Number of groups", [](const DatasetManifest& m) { return m.group_count; });
  write_text_atomic(out_dir / "table1.csv", table);

  std::set<std::size_t> people_keys;
  for (const auto& m : manifests) {
    for (const auto& [k, v] : m.people_per_scene) people_keys.insert(k);
  }
  std::string pps = "people" + header.substr(1);
  for (std::size_t k : people_keys) {
    pps += std::to_string(k);
    for (const auto& m : manifests) {
      const auto it = m.people_per_scene.find(k);
      pps += "," + std::to_string(it == m.people_per_scene.end() ? 0 : it->second);
    }
    pps += "\n";
  }
  write_text_atomic(out_dir / "people_per_scene.csv", pps);

  auto deciles = [&](auto field) {
    std::string out = "bin_lo,bin_hi" + header.substr(1);
    for (std::size_t i = 0; i < 10; ++i) {
      out += decile_label(i);
      for (const auto& m : manifests) out += "," + std::to_string(field(m)[i]);
      out += "\n";
    }
    return out;
  };
  write_text_atomic(out_dir / "individual_occlusion.csv",
                    deciles([](const DatasetManifest& m) { return m.individual_occlusion; }));
  write_text_atomic(out_dir / "group_occlusion.csv",
                    deciles([](const DatasetManifest& m) { return m.group_occlusion; }));
  return manifests;
}

DatasetManifest stats_report(std::span<const std::filesystem::path> annotation_paths,
                             const std::filesystem::path& out_dir, int workers) {
  const SplitInput split{"all", {annotation_paths.begin(), annotation_paths.end()}};
  return stats_report(std::span<const SplitInput>(&split, 1), out_dir, workers).front();
}

}  // namespace fform
