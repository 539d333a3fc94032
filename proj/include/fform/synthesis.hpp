#pragma once

// Scene synthesis: draw a group count, sample groups from the pool, rotate
// each about its center and place it with the Adam solver.

#include <cstdint>
#include <string>
#include <vector>

#include "fform/geometry.hpp"
#include "fform/placement.hpp"

namespace fform {

enum class PoolSampling { kWithReplacement, kWithoutReplacement };

struct SceneConfig {
  int min_groups = 3;
  int max_groups = 10;
  double rotation_min = 0.0;     // radians, inclusive
  double rotation_max = kTwoPi;  // radians, exclusive
  PlacementParams placement;
  PoolSampling pool_sampling = PoolSampling::kWithReplacement;

  void validate() const;
};

struct GroupProvenance {
  std::string pool_scene_id;
  std::string source_group_id;
  double rotation = 0.0;
  Vec2 translation;

  friend bool operator==(const GroupProvenance&, const GroupProvenance&) = default;
};

/// Outcome of placing group `group_index` against the groups placed before it.
struct PlacementRecord {
  int group_index = 0;
  bool converged = true;
  int iterations = 0;
  double final_loss = 0.0;
  std::vector<double> residuals;  // residuals[j]: hinge sum against group j < group_index

  friend bool operator==(const PlacementRecord&, const PlacementRecord&) = default;
};

struct SceneGeometry {
  std::string scene_id;
  std::vector<GroupGeometry> groups;
  std::vector<GroupProvenance> provenance;
  std::vector<PlacementRecord> constraint_report;
  /// Parameters with r_d resolved; needed to recompute residuals from files.
  PlacementParams placement;

  bool all_converged() const;
  friend bool operator==(const SceneGeometry&, const SceneGeometry&) = default;
};

/// Person ids in synthesized scenes are re-keyed as "g<k>.<source id>".
std::string scene_person_id(int group_index, const std::string& source_id);

/// Resolves r_d from the pool when the config leaves it unset.
SceneConfig resolve_config(const GroupPool& pool, const SceneConfig& cfg);

SceneGeometry synthesize_scene(const GroupPool& pool, const SceneConfig& cfg, std::uint64_t seed,
                               std::string scene_id = "scene");

/// Stable per-scene seed for batch index `k`.
std::uint64_t derive_scene_seed(std::uint64_t master_seed, std::uint64_t k);
std::string batch_scene_id(std::size_t k);

/// Serial reference: scenes generated in index order on the calling thread.
std::vector<SceneGeometry> synthesize_batch_serial(const GroupPool& pool, const SceneConfig& cfg, std::size_t count,
                                                   std::uint64_t master_seed);

/// OpenMP fan-out over scenes; output is identical to the serial reference
/// for any worker count. Errors are rethrown for the lowest failing index.
std::vector<SceneGeometry> synthesize_batch(const GroupPool& pool, const SceneConfig& cfg, std::size_t count,
                                            std::uint64_t master_seed, int workers = 1);

}  // namespace fform
