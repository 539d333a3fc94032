#include "fform/synthesis.hpp"

#include <exception>
#include <random>
#include <utility>

#include <omp.h>

#include "fform/error.hpp"

namespace fform {

void SceneConfig::validate() const {
  if (min_groups < 1 || min_groups > max_groups) {
    throw Error(ErrorKind::kConfig, "group_count_range must satisfy 1 <= min <= max (got [" +
                                        std::to_string(min_groups) + ", " + std::to_string(max_groups) + "])");
  }
  if (!std::isfinite(rotation_min) || !std::isfinite(rotation_max) || rotation_min > rotation_max) {
    throw Error(ErrorKind::kConfig, "rotation_range must be a finite interval with min <= max");
  }
}

bool SceneGeometry::all_converged() const {
  for (const auto& r : constraint_report) {
    if (!r.converged) return false;
  }
  return true;
}

std::string scene_person_id(int group_index, const std::string& source_id) {
  return "g" + std::to_string(group_index) + "." + source_id;
}

SceneConfig resolve_config(const GroupPool& pool, const SceneConfig& cfg) {
  SceneConfig out = cfg;
  if (!out.placement.r_d) {
    GroupPool view = pool;
    view.distance_mode = cfg.placement.distance_mode;
    out.placement.r_d = estimate_distance_variance_ratio(view);
  }
  return out;
}

namespace {

struct PoolRef {
  const PoolScene* scene;
  const GroupGeometry* group;
};

std::vector<PoolRef> flatten(const GroupPool& pool) {
  std::vector<PoolRef> refs;
  for (const auto& s : pool.scenes) {
    for (const auto& g : s.groups) refs.push_back({&s, &g});
  }
  return refs;
}

SceneGeometry synthesize_resolved(const std::vector<PoolRef>& refs, const SceneConfig& cfg, std::uint64_t seed,
                                  std::string scene_id) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(cfg.min_groups, cfg.max_groups);
  const int n = count_dist(rng);

  std::vector<std::size_t> picks;
  if (cfg.pool_sampling == PoolSampling::kWithReplacement) {
    std::uniform_int_distribution<std::size_t> pick(0, refs.size() - 1);
    for (int k = 0; k < n; ++k) picks.push_back(pick(rng));
  } else {
    if (static_cast<std::size_t>(n) > refs.size()) {
      throw Error(ErrorKind::kPoolExhausted, "scene needs " + std::to_string(n) + " groups but the pool holds " +
                                                 std::to_string(refs.size()) + " (sampling without replacement)");
    }
    std::vector<std::size_t> order(refs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // partial Fisher-Yates
    for (int k = 0; k < n; ++k) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), order.size() - 1);
      std::swap(order[static_cast<std::size_t>(k)], order[pick(rng)]);
      picks.push_back(order[static_cast<std::size_t>(k)]);
    }
  }

  SceneGeometry scene;
  scene.scene_id = std::move(scene_id);
  scene.placement = cfg.placement;
  std::uniform_real_distribution<double> rot_dist(cfg.rotation_min, cfg.rotation_max);

  for (int k = 0; k < n; ++k) {
    const PoolRef& ref = refs[picks[static_cast<std::size_t>(k)]];
    const double rotation = cfg.rotation_max > cfg.rotation_min ? rot_dist(rng) : cfg.rotation_min;
    const std::uint64_t placement_seed = rng();

    GroupGeometry candidate = transform_group(*ref.group, rotation, {});
    candidate.group_id = "g" + std::to_string(k);
    for (auto& m : candidate.members) m.person_id = scene_person_id(k, m.person_id);

    PlacementOutcome out = place_group(candidate, scene.groups, cfg.placement, placement_seed);
    const Vec2 translation = summarize_group(out.placed).mu - summarize_group(candidate).mu;

    scene.provenance.push_back({ref.scene->scene_id, ref.group->group_id, rotation, translation});
    scene.constraint_report.push_back(
        {k, out.converged, out.iterations, out.final_loss, std::move(out.per_pair_hinge_residuals)});
    scene.groups.push_back(std::move(out.placed));
  }
  return scene;
}

void check_inputs(const GroupPool& pool, const SceneConfig& cfg) {
  if (pool.group_count() == 0) throw Error(ErrorKind::kValidation, "group pool is empty");
  cfg.validate();
}

}  // namespace

SceneGeometry synthesize_scene(const GroupPool& pool, const SceneConfig& cfg, std::uint64_t seed,
                               std::string scene_id) {
  check_inputs(pool, cfg);
  const SceneConfig resolved = cfg.max_groups > 1 ? resolve_config(pool, cfg) : cfg;
  return synthesize_resolved(flatten(pool), resolved, seed, std::move(scene_id));
}

std::uint64_t derive_scene_seed(std::uint64_t master_seed, std::uint64_t k) {
  // splitmix64 finalizer over (master, index)
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string batch_scene_id(std::size_t k) {
  std::string digits = std::to_string(k);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "scene_" + digits;
}

namespace {

SceneGeometry batch_item(const std::vector<PoolRef>& refs, const SceneConfig& cfg, std::size_t k,
                         std::uint64_t master_seed) {
  try {
    return synthesize_resolved(refs, cfg, derive_scene_seed(master_seed, k), batch_scene_id(k));
  } catch (const Error& e) {
    throw Error(e.kind(), "scene " + std::to_string(k) + ": " + e.what());
  }
}

}  // namespace

std::vector<SceneGeometry> synthesize_batch_serial(const GroupPool& pool, const SceneConfig& cfg, std::size_t count,
                                                   std::uint64_t master_seed) {
  if (count < 1) throw Error(ErrorKind::kParameter, "batch count must be >= 1");
  check_inputs(pool, cfg);
  const SceneConfig resolved = cfg.max_groups > 1 ? resolve_config(pool, cfg) : cfg;
  const auto refs = flatten(pool);
  std::vector<SceneGeometry> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(batch_item(refs, resolved, k, master_seed));
  return out;
}

std::vector<SceneGeometry> synthesize_batch(const GroupPool& pool, const SceneConfig& cfg, std::size_t count,
                                            std::uint64_t master_seed, int workers) {
  if (count < 1) throw Error(ErrorKind::kParameter, "batch count must be >= 1");
  if (workers < 1) throw Error(ErrorKind::kParameter, "workers must be >= 1");
  check_inputs(pool, cfg);
  const SceneConfig resolved = cfg.max_groups > 1 ? resolve_config(pool, cfg) : cfg;
  const auto refs = flatten(pool);

  std::vector<SceneGeometry> out(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for num_threads(workers) schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      out[i] = batch_item(refs, resolved, i, master_seed);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace fform
