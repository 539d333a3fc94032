// Serial reference vs OpenMP kernels: batch synthesis and per-frame occlusion.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "fform/imaging.hpp"
#include "fform/io.hpp"
#include "fform/synthesis.hpp"

using namespace fform;

namespace {

template <typename F>
double seconds(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

std::vector<BoundingBox> crowd(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(0.0, 1800.0);
  std::uniform_real_distribution<double> w(20.0, 120.0);
  std::uniform_real_distribution<double> depth(5.0, 40.0);
  std::vector<BoundingBox> boxes;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = x(rng);
    const double y1 = x(rng) * 0.5;
    boxes.push_back({"p" + std::to_string(i), x1, y1, x1 + w(rng), y1 + 2.5 * w(rng), depth(rng)});
  }
  return boxes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fform serial vs parallel benchmark"};
  std::size_t scenes = 200;
  std::size_t persons = 400;
  int workers = omp_get_max_threads();
  int reps = 3;
  app.add_option("--scenes", scenes)->capture_default_str();
  app.add_option("--persons", persons, "Boxes in the occlusion frame")->capture_default_str();
  app.add_option("--workers", workers)->capture_default_str();
  app.add_option("--reps", reps)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const GroupPool pool = generate_fixture_pool(FixtureSpec{}, 7);
  const SceneConfig cfg = resolve_config(pool, SceneConfig{});

  std::vector<SceneGeometry> a;
  std::vector<SceneGeometry> b;
  const double ts = seconds([&] { a = synthesize_batch_serial(pool, cfg, scenes, 1); }, reps);
  const double tp = seconds([&] { b = synthesize_batch(pool, cfg, scenes, 1, workers); }, reps);
  std::printf("synthesize_batch  %zu scenes   serial %8.3f s   %d workers %8.3f s   speedup %5.2fx   identical %s\n",
              scenes, ts, workers, tp, ts / tp, a == b ? "yes" : "NO");

  const auto boxes = crowd(persons, 3);
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i + 3 < persons; i += 4) {
    groups.push_back({boxes[i].person_id, boxes[i + 1].person_id, boxes[i + 2].person_id});
  }
  OcclusionStats s;
  OcclusionStats p;
  const double os = seconds([&] { s = occlusion_stats_serial(boxes, groups); }, reps);
  const double op = seconds([&] { p = occlusion_stats(boxes, groups, workers); }, reps);
  const bool same = s.individual == p.individual && s.group == p.group;
  std::printf("occlusion_stats   %zu boxes    serial %8.3f s   %d workers %8.3f s   speedup %5.2fx   identical %s\n",
              persons, os, workers, op, os / op, same ? "yes" : "NO");
  return (a == b && same) ? 0 : 1;
}
