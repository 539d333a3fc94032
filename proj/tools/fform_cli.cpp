// fform: command-line front end for scene synthesis, projection, occlusion
// statistics and group-detection scoring.
//
// Exit codes: 0 success, 1 validation/usage error, 2 I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fform/config.hpp"
#include "fform/error.hpp"
#include "fform/evaluation.hpp"
#include "fform/imaging.hpp"
#include "fform/io.hpp"
#include "fform/synthesis.hpp"

namespace fs = std::filesystem;
using namespace fform;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  int workers = 1;

  ToolConfig config() const { return config_path.empty() ? ToolConfig{} : load_config(config_path); }
};

int run_fixture(const Globals& g, const FixtureSpec& spec, const std::string& out) {
  const GroupPool pool = generate_fixture_pool(spec, g.seed);
  write_pool(pool, out);
  std::cout << "wrote " << pool.scenes.size() << " pool scenes (" << pool.group_count() << " groups) to " << out
            << "\n";
  return 0;
}

int run_synthesize(const Globals& g, const std::string& pool_path, std::size_t count, const std::string& out) {
  const ToolConfig cfg = g.config();
  GroupPool pool = load_pool(pool_path);
  pool.distance_mode = cfg.scene.placement.distance_mode;
  const auto scenes = synthesize_batch(pool, cfg.scene, count, g.seed, g.workers);
  write_scenes(scenes, out);
  std::size_t flagged = 0;
  for (const auto& s : scenes) flagged += s.all_converged() ? 0 : 1;
  std::cout << "wrote " << scenes.size() << " scenes to " << out << " (r_d = " << *scenes.front().placement.r_d
            << ", " << flagged << " with unconverged placements)\n";
  return 0;
}

int run_project(const Globals& g, const std::string& scenes_path, const std::string& out) {
  const ToolConfig cfg = g.config();
  const auto scenes = read_scenes(scenes_path);
  const auto records = annotate_batch(scenes, cfg.camera, g.seed, g.workers);
  write_annotations(records, out);
  std::size_t persons = 0;
  for (const auto& r : records) persons += r.persons.size();
  std::cout << "wrote " << records.size() << " annotation records (" << persons << " boxes) to " << out << "\n";
  return 0;
}

int run_occlusion(const Globals& g, const std::string& annotations_path, const std::string& out) {
  const auto records = read_annotations(annotations_path);
  std::string csv = "scene_id,kind,id,occlusion\n";
  for (const auto& rec : records) {
    const auto boxes = rec.boxes();
    const OcclusionStats stats = occlusion_stats(boxes, rec.groups, g.workers);
    for (std::size_t i = 0; i < stats.individual.size(); ++i) {
      csv += rec.scene_id + ",person," + stats.person_ids[i] + "," + std::to_string(stats.individual[i]) + "\n";
    }
    for (std::size_t i = 0; i < stats.group.size(); ++i) {
      csv += rec.scene_id + ",group," + std::to_string(i) + "," +
             (stats.group[i] ? std::to_string(*stats.group[i]) : std::string()) + "\n";
    }
  }
  write_text_atomic(out, csv);
  std::cout << "wrote occlusion rates for " << records.size() << " scenes to " << out << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string gt;
  std::string pred;
  std::vector<std::string> affinity;
  double tolerance = kStandardTolerance;
  double link_threshold = 0.5;
  double graph_cut_rate = 0.0;
  bool keep_singletons = false;
  std::string out;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto gt_frames = read_partitions(a.gt);
  std::vector<PartitionFrame> pred_frames;
  if (!a.pred.empty()) {
    pred_frames = read_partitions(a.pred);
  } else {
    for (const auto& path : a.affinity) {
      const AffinityMatrix m = read_affinity_csv(path);
      pred_frames.push_back({fs::path(path).stem().string(), cluster_affinity(m, a.link_threshold, a.graph_cut_rate)});
    }
  }
  std::vector<std::pair<std::string, ScoreReport>> frames;
  std::vector<ScoreReport> reports;
  for (const auto& gt : gt_frames) {
    GroupPartition pred;
    for (const auto& p : pred_frames) {
      if (p.frame_id == gt.frame_id) pred = p.partition;
    }
    const ScoreReport r = f1_at_t(gt.partition, pred, a.tolerance, !a.keep_singletons);
    frames.emplace_back(gt.frame_id, r);
    reports.push_back(r);
  }
  for (const auto& p : pred_frames) {
    bool known = false;
    for (const auto& gt : gt_frames) known = known || gt.frame_id == p.frame_id;
    if (!known) throw Error(ErrorKind::kValidation, "predicted frame '" + p.frame_id + "' has no ground truth");
  }
  const ScoreReport overall = combine_reports(reports, a.tolerance);
  const std::string text = score_report_json(overall, frames);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_atomic(a.out, text);
    std::cout << "F1@" << a.tolerance << " = " << overall.f1 << " (precision " << overall.precision << ", recall "
              << overall.recall << ")\n";
  }
  return 0;
}

int run_stats(const Globals& g, const std::vector<std::string>& annotations, const std::vector<std::string>& splits,
              const std::string& out) {
  std::vector<SplitInput> inputs;
  if (!annotations.empty()) inputs.push_back({"all", {annotations.begin(), annotations.end()}});
  for (const auto& s : splits) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
      throw Error(ErrorKind::kValidation, "--split expects name=path, got '" + s + "'");
    }
    const std::string name = s.substr(0, eq);
    auto it = std::find_if(inputs.begin(), inputs.end(), [&](const SplitInput& in) { return in.name == name; });
    if (it == inputs.end()) {
      inputs.push_back({name, {}});
      it = inputs.end() - 1;
    }
    it->paths.emplace_back(s.substr(eq + 1));
  }
  if (inputs.empty()) throw Error(ErrorKind::kEmptyDataset, "stats needs --annotations or --split inputs");
  const auto manifests = stats_report(inputs, out, g.workers);
  for (const auto& m : manifests) {
    std::cout << m.split << ": " << m.scene_count << " images, " << m.person_count << " people, " << m.group_count
              << " groups\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"F-formation scene synthesis and group-detection evaluation toolkit"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON config overriding placement/scene/camera defaults");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");

  FixtureSpec spec;
  std::string fixture_out;
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic pool of circular formations");
  fixture->add_option("--out", fixture_out, "Pool CSV to write")->required();
  fixture->add_option("--scenes", spec.scene_count)->capture_default_str();
  fixture->add_option("--min-groups", spec.min_groups_per_scene)->capture_default_str();
  fixture->add_option("--max-groups", spec.max_groups_per_scene)->capture_default_str();
  fixture->add_option("--min-members", spec.min_members)->capture_default_str();
  fixture->add_option("--max-members", spec.max_members)->capture_default_str();
  fixture->add_option("--min-radius", spec.min_radius)->capture_default_str();
  fixture->add_option("--max-radius", spec.max_radius)->capture_default_str();
  fixture->add_option("--jitter", spec.radius_jitter, "Relative member radius jitter")->capture_default_str();
  fixture->add_option("--extent", spec.scene_extent)->capture_default_str();
  fixture->add_option("--spacing", spec.min_center_spacing)->capture_default_str();

  std::string pool_path;
  std::size_t count = 1;
  std::string scenes_out;
  auto* synth = app.add_subcommand("synthesize", "Synthesize scene geometries from a pool");
  synth->add_option("--pool", pool_path, "Pool CSV")->required();
  synth->add_option("--count", count, "Number of scenes")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--out", scenes_out, "Scenes JSON to write")->required();

  std::string scenes_in;
  std::string annotations_out;
  auto* project = app.add_subcommand("project", "Project scenes through sampled cameras into annotations");
  project->add_option("--scenes", scenes_in, "Scenes JSON")->required();
  project->add_option("--out", annotations_out, "Annotations JSON to write")->required();

  std::string occ_in;
  std::string occ_out;
  auto* occlusion = app.add_subcommand("occlusion", "Per-person and per-group occlusion rates");
  occlusion->add_option("--annotations", occ_in, "Annotations JSON")->required();
  occlusion->add_option("--out", occ_out, "CSV to write")->required();

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Score predicted groups with F1@T");
  evaluate->add_option("--gt", eval.gt, "Ground truth (partitions or annotations JSON)")->required();
  auto* pred_opt = evaluate->add_option("--pred", eval.pred, "Predicted partitions JSON");
  auto* aff_opt = evaluate->add_option("--affinity", eval.affinity, "Affinity CSV per frame (frame id = file stem)");
  pred_opt->excludes(aff_opt);
  evaluate->add_option("--tolerance,-T", eval.tolerance, "Match tolerance T in (0, 1]")->capture_default_str();
  evaluate->add_option("--link-threshold", eval.link_threshold)->capture_default_str();
  evaluate->add_option("--graph-cut-rate", eval.graph_cut_rate)->capture_default_str();
  evaluate->add_flag("--keep-singletons", eval.keep_singletons, "Score 1-person groups too");
  evaluate->add_option("--out", eval.out, "Report JSON (stdout when omitted)");

  std::vector<std::string> stats_annotations;
  std::vector<std::string> stats_splits;
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "Dataset manifest and histogram tables");
  stats->add_option("--annotations", stats_annotations, "Annotation files (split 'all')");
  stats->add_option("--split", stats_splits, "name=path, repeatable");
  stats->add_option("--out", stats_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*config_cmd) {
      std::cout << to_json_text(g.config());
      return 0;
    }
    if (*fixture) return run_fixture(g, spec, fixture_out);
    if (*synth) return run_synthesize(g, pool_path, count, scenes_out);
    if (*project) return run_project(g, scenes_in, annotations_out);
    if (*occlusion) return run_occlusion(g, occ_in, occ_out);
    if (*evaluate) {
      if (eval.pred.empty() && eval.affinity.empty()) {
        throw Error(ErrorKind::kValidation, "evaluate needs --pred or --affinity");
      }
      return run_evaluate(eval);
    }
    if (*stats) return run_stats(g, stats_annotations, stats_splits, stats_out);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::kIo ? kExitIo : kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}
