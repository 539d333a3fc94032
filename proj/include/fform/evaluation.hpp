#pragma once

// Affinity-graph grouping and the tolerant F1@T group-detection score.

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fform {

struct AffinityMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;  // row-major n x n

  std::size_t size() const { return ids.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
  /// Throws kValidation unless square, symmetric within 1e-9, unit diagonal,
  /// values in [0, 1] and n >= 1.
  void validate() const;
};

/// Groups are kept as sorted id lists; the partition itself is canonical
/// once `canonicalize` has run (groups ordered by their smallest id).
struct GroupPartition {
  std::vector<std::vector<std::string>> groups;

  void canonicalize();
  /// Throws kValidation on empty or overlapping groups.
  void validate() const;
  friend bool operator==(const GroupPartition&, const GroupPartition&) = default;
};

struct CutResult {
  double weight = 0.0;
  std::vector<std::size_t> side;  // vertex indices on one side of the cut
};

/// Global minimum cut of an undirected graph given by a dense symmetric
/// weight matrix (Stoer-Wagner). Requires n >= 2.
CutResult stoer_wagner_min_cut(std::span<const double> weights, std::size_t n);

/// Connected components of the graph with edges m[i][j] >= link_threshold,
/// each component of size >= 3 recursively split along its minimum cut while
/// cut_weight / (|S| * |T|) < graph_cut_rate. Returns a canonical partition
/// covering every id (singletons included).
GroupPartition cluster_affinity(const AffinityMatrix& m, double link_threshold, double graph_cut_rate);

struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double tolerance = 0.0;
  std::size_t gt_groups = 0;    // after singleton dropping
  std::size_t pred_groups = 0;  // after singleton dropping
  bool vacuous = false;         // both sides empty; scores reported as 1
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (gt index, pred index)
};

inline constexpr double kStandardTolerance = 2.0 / 3.0;

/// True when `pred` is an acceptable detection of `gt` at tolerance T:
/// |P & G| >= ceil(T |G|) and |P \ G| <= floor((1 - T) |G|).
bool group_matches(std::span<const std::string> gt, std::span<const std::string> pred, double tolerance);

/// Groups must be sorted id lists (GroupPartition::canonicalize does this).
/// Matching is one-to-one: greedy by descending overlap with (gt, pred)
/// index tiebreak, then augmented to maximum cardinality.
ScoreReport f1_at_t(const GroupPartition& gt, const GroupPartition& pred, double tolerance,
                    bool drop_singletons = true);

/// Micro-averaged score over frames: matches and group counts are summed.
ScoreReport combine_reports(std::span<const ScoreReport> frames, double tolerance);

}  // namespace fform
