#pragma once

// File formats (pool CSV, scene/annotation/partition JSON, affinity CSV),
// the synthetic fixture pool, and dataset statistics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fform/evaluation.hpp"
#include "fform/geometry.hpp"
#include "fform/imaging.hpp"
#include "fform/synthesis.hpp"

namespace fform {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kPoolCsvHeader =
    "scene_id,group_id,person_id,x_m,y_m,body_orientation_rad,head_orientation_rad";

// ---- group pool (CSV) ----

/// One row per person; head orientation may be empty. Orientations are
/// wrapped into [0, 2*pi). Throws kParse (with line number) on malformed
/// rows and kValidation listing any singleton group.
GroupPool parse_pool_csv(std::istream& in, const std::string& source = "<stream>");
GroupPool load_pool(const std::filesystem::path& path);
void write_pool(const GroupPool& pool, const std::filesystem::path& path);
std::string serialize_pool(const GroupPool& pool);

// ---- fixture pool ----

struct FixtureSpec {
  int scene_count = 12;
  int min_groups_per_scene = 2;
  int max_groups_per_scene = 4;
  int min_members = 3;
  int max_members = 5;
  double min_radius = 0.6;   // meters
  double max_radius = 0.9;
  double radius_jitter = 0.0;  // relative, each member radius scaled by 1 + U(-j, j)
  double scene_extent = 8.0;   // group centers drawn from a square of this side
  double min_center_spacing = 2.5;

  void validate() const;
};

/// Circular formations: members evenly spaced on a circle (random phase),
/// body and head facing the center.
GroupPool generate_fixture_pool(const FixtureSpec& spec, std::uint64_t seed);

// ---- scenes (JSON) ----

std::string serialize_scenes(std::span<const SceneGeometry> scenes);
std::vector<SceneGeometry> parse_scenes(const std::string& text);
void write_scenes(std::span<const SceneGeometry> scenes, const std::filesystem::path& path);
std::vector<SceneGeometry> read_scenes(const std::filesystem::path& path);

// ---- annotations (JSON) ----

struct AnnotatedPerson {
  BoundingBox box;  // carries person_id and depth
  Vec2 ground;

  friend bool operator==(const AnnotatedPerson&, const AnnotatedPerson&) = default;
};

struct AnnotationRecord {
  std::string scene_id;
  std::vector<AnnotatedPerson> persons;
  std::vector<std::vector<std::string>> groups;  // visible members only
  CameraConfig camera;

  /// Throws kValidation when a grouped id has no person or a box is empty.
  void validate() const;
  std::vector<BoundingBox> boxes() const;
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Projects a scene and keeps groups restricted to members with a box;
/// groups left without visible members are omitted.
AnnotationRecord annotate(const SceneGeometry& scene, const CameraConfig& cam);

/// Samples one camera per scene (seed derived from `master_seed` and the
/// scene index) and annotates in parallel; output order follows `scenes`.
std::vector<AnnotationRecord> annotate_batch(std::span<const SceneGeometry> scenes, const CameraRanges& ranges,
                                             std::uint64_t master_seed, int workers = 1);

std::string serialize_annotations(std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> parse_annotations(const std::string& text);
void write_annotations(std::span<const AnnotationRecord> records, const std::filesystem::path& path);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);

// ---- partitions and affinities ----

struct PartitionFrame {
  std::string frame_id;
  GroupPartition partition;
};

/// Accepts a partitions file or an annotations file (groups per scene).
std::vector<PartitionFrame> read_partitions(const std::filesystem::path& path);
void write_partitions(std::span<const PartitionFrame> frames, const std::filesystem::path& path);

/// First row: ids; then n rows of n numbers.
AffinityMatrix parse_affinity_csv(std::istream& in, const std::string& source = "<stream>");
AffinityMatrix read_affinity_csv(const std::filesystem::path& path);

std::string score_report_json(const ScoreReport& report, std::span<const std::pair<std::string, ScoreReport>> frames);

// ---- statistics ----

struct DatasetManifest {
  std::string split;
  std::size_t scene_count = 0;
  std::size_t person_count = 0;
  std::size_t group_count = 0;  // groups with >= 2 visible members
  std::map<std::size_t, std::size_t> people_per_scene;  // people -> scenes
  std::array<std::size_t, 10> individual_occlusion{};   // deciles of O_I
  std::array<std::size_t, 10> group_occlusion{};        // deciles of group occlusion
};

std::size_t decile(double rate);

DatasetManifest compute_manifest(const std::string& split, std::span<const AnnotationRecord> records, int workers = 1);

struct SplitInput {
  std::string name;
  std::vector<std::filesystem::path> paths;
};

/// Writes manifest.json, table1.csv, people_per_scene.csv,
/// individual_occlusion.csv and group_occlusion.csv into `out_dir`.
/// Throws kEmptyDataset when no split holds any scene.
std::vector<DatasetManifest> stats_report(std::span<const SplitInput> splits, const std::filesystem::path& out_dir,
                                          int workers = 1);
DatasetManifest stats_report(std::span<const std::filesystem::path> annotation_paths,
                             const std::filesystem::path& out_dir, int workers = 1);

// ---- misc ----

std::string read_text(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace fform
