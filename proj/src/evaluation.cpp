#include "fform/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fform/error.hpp"

namespace fform {

void AffinityMatrix::validate() const {
  const std::size_t n = ids.size();
  if (n == 0) throw Error(ErrorKind::kValidation, "affinity matrix has no ids");
  if (values.size() != n * n) {
    throw Error(ErrorKind::kValidation, "affinity matrix has " + std::to_string(values.size()) +
                                            " values for " + std::to_string(n) + " ids");
  }
  if (std::set<std::string>(ids.begin(), ids.end()).size() != n) {
    throw Error(ErrorKind::kValidation, "affinity matrix ids are not unique");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(at(i, i) - 1.0) > 1e-9) {
      throw Error(ErrorKind::kValidation, "affinity diagonal entry for '" + ids[i] + "' is not 1");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = at(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::kValidation, "affinity (" + ids[i] + ", " + ids[j] + ") is outside [0, 1]");
      }
      if (std::abs(v - at(j, i)) > 1e-9) {
        throw Error(ErrorKind::kValidation, "affinity (" + ids[i] + ", " + ids[j] + ") is not symmetric");
      }
    }
  }
}

void GroupPartition::canonicalize() {
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end());
}

void GroupPartition::validate() const {
  std::set<std::string> seen;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorKind::kValidation, "partition contains an empty group");
    for (const auto& id : g) {
      if (!seen.insert(id).second) {
        throw Error(ErrorKind::kValidation, "person '" + id + "' appears in more than one group");
      }
    }
  }
}

CutResult stoer_wagner_min_cut(std::span<const double> weights, std::size_t n) {
  if (n < 2) throw Error(ErrorKind::kParameter, "minimum cut needs at least two vertices");
  std::vector<double> w(weights.begin(), weights.end());
  // members[v]: original vertices merged into super-vertex v
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t v = 0; v < n; ++v) members[v] = {v};
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), 0);

  CutResult best;
  best.weight = std::numeric_limits<double>::infinity();
  std::vector<double> key(n);
  std::vector<bool> added(n);

  while (alive.size() > 1) {
    std::fill(key.begin(), key.end(), 0.0);
    std::fill(added.begin(), added.end(), false);
    std::size_t prev = alive.front();
    std::size_t last = alive.front();
    for (std::size_t step = 0; step < alive.size(); ++step) {
      std::size_t pick = n;
      for (std::size_t v : alive) {
        if (!added[v] && (pick == n || key[v] > key[pick])) pick = v;
      }
      added[pick] = true;
      prev = last;
      last = pick;
      for (std::size_t v : alive) {
        if (!added[v]) key[v] += w[pick * n + v];
      }
    }
    // cut-of-the-phase separates `last` from everything else
    if (key[last] < best.weight) {
      best.weight = key[last];
      best.side = members[last];
    }
    for (std::size_t v : alive) {
      w[prev * n + v] += w[last * n + v];
      w[v * n + prev] = w[prev * n + v];
    }
    w[prev * n + prev] = 0.0;
    members[prev].insert(members[prev].end(), members[last].begin(), members[last].end());
    alive.erase(std::find(alive.begin(), alive.end(), last));
  }
  std::sort(best.side.begin(), best.side.end());
  return best;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

void refine(const AffinityMatrix& m, double link_threshold, double graph_cut_rate,
            const std::vector<std::size_t>& component, std::vector<std::vector<std::size_t>>& out) {
  const std::size_t k = component.size();
  if (k < 3 || graph_cut_rate <= 0.0) {
    out.push_back(component);
    return;
  }
  std::vector<double> w(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double v = m.at(component[a], component[b]);
      if (a != b && v >= link_threshold) w[a * k + b] = v;
    }
  }
  const CutResult cut = stoer_wagner_min_cut(w, k);
  const double s = static_cast<double>(cut.side.size());
  const double normalized = cut.weight / (s * (static_cast<double>(k) - s));
  if (!(normalized < graph_cut_rate)) {
    out.push_back(component);
    return;
  }
  std::vector<bool> in_side(k, false);
  for (std::size_t v : cut.side) in_side[v] = true;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t a = 0; a < k; ++a) (in_side[a] ? left : right).push_back(component[a]);
  refine(m, link_threshold, graph_cut_rate, left, out);
  refine(m, link_threshold, graph_cut_rate, right, out);
}

}  // namespace

GroupPartition cluster_affinity(const AffinityMatrix& m, double link_threshold, double graph_cut_rate) {
  if (!(link_threshold >= 0.0 && link_threshold <= 1.0) || !(graph_cut_rate >= 0.0 && graph_cut_rate <= 1.0)) {
    throw Error(ErrorKind::kParameter, "link_threshold and graph_cut_rate must lie in [0, 1]");
  }
  m.validate();
  const std::size_t n = m.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m.at(i, j) >= link_threshold) parent[find_root(parent, i)] = find_root(parent, j);
    }
  }
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t r = find_root(parent, v);
    if (slot[r] == n) {
      slot[r] = components.size();
      components.emplace_back();
    }
    components[slot[r]].push_back(v);
  }

  std::vector<std::vector<std::size_t>> groups;
  for (const auto& c : components) refine(m, link_threshold, graph_cut_rate, c, groups);

  GroupPartition out;
  for (const auto& g : groups) {
    std::vector<std::string> ids;
    for (std::size_t v : g) ids.push_back(m.ids[v]);
    out.groups.push_back(std::move(ids));
  }
  out.canonicalize();
  return out;
}

namespace {

std::size_t overlap(std::span<const std::string> a, std::span<const std::string> b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

// Slack absorbs rounding in T * |G| (e.g. (2/3) * 3).
constexpr double kCountSlack = 1e-9;

std::vector<std::vector<std::string>> kept(const GroupPartition& p, bool drop_singletons) {
  std::vector<std::vector<std::string>> out;
  for (const auto& g : p.groups) {
    if (drop_singletons && g.size() < 2) continue;
    out.push_back(g);
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

bool augment(std::size_t g, const std::vector<std::vector<std::size_t>>& adj, std::vector<bool>& seen,
             std::vector<std::size_t>& pred_owner, std::vector<std::size_t>& gt_match, std::size_t none) {
  for (std::size_t p : adj[g]) {
    if (seen[p]) continue;
    seen[p] = true;
    if (pred_owner[p] == none || augment(pred_owner[p], adj, seen, pred_owner, gt_match, none)) {
      pred_owner[p] = g;
      gt_match[g] = p;
      return true;
    }
  }
  return false;
}

}  // namespace

bool group_matches(std::span<const std::string> gt, std::span<const std::string> pred, double tolerance) {
  const double size = static_cast<double>(gt.size());
  const auto need = static_cast<std::size_t>(std::ceil(tolerance * size - kCountSlack));
  const auto allow = static_cast<std::size_t>(std::floor((1.0 - tolerance) * size + kCountSlack));
  const std::size_t common = overlap(gt, pred);
  return common >= need && pred.size() - common <= allow;
}

ScoreReport f1_at_t(const GroupPartition& gt, const GroupPartition& pred, double tolerance, bool drop_singletons) {
  if (!(tolerance > 0.0 && tolerance <= 1.0)) {
    throw Error(ErrorKind::kParameter, "tolerance T must lie in (0, 1]");
  }
  const auto g = kept(gt, drop_singletons);
  const auto p = kept(pred, drop_singletons);

  ScoreReport r;
  r.tolerance = tolerance;
  r.gt_groups = g.size();
  r.pred_groups = p.size();
  if (g.empty() && p.empty()) {
    r.precision = r.recall = r.f1 = 1.0;
    r.vacuous = true;
    return r;
  }

  struct Candidate {
    std::size_t common;
    std::size_t gi;
    std::size_t pi;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (group_matches(g[i], p[j], tolerance)) candidates.push_back({overlap(g[i], p[j]), i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.common != b.common) return a.common > b.common;
    if (a.gi != b.gi) return a.gi < b.gi;
    return a.pi < b.pi;
  });

  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> gt_match(g.size(), none);
  std::vector<std::size_t> pred_owner(p.size(), none);
  std::vector<std::vector<std::size_t>> adj(g.size());
  for (const auto& c : candidates) {
    adj[c.gi].push_back(c.pi);
    if (gt_match[c.gi] == none && pred_owner[c.pi] == none) {
      gt_match[c.gi] = c.pi;
      pred_owner[c.pi] = c.gi;
    }
  }
  // Above T = 1/2 the match graph is already a matching and greedy is final;
  // lower tolerances can need augmenting paths to reach maximum cardinality.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gt_match[i] != none || adj[i].empty()) continue;
    std::vector<bool> seen(p.size(), false);
    augment(i, adj, seen, pred_owner, gt_match, none);
  }

  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gt_match[i] != none) r.matches.emplace_back(i, gt_match[i]);
  }
  const double matched = static_cast<double>(r.matches.size());
  r.precision = p.empty() ? 0.0 : matched / static_cast<double>(p.size());
  r.recall = g.empty() ? 0.0 : matched / static_cast<double>(g.size());
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

ScoreReport combine_reports(std::span<const ScoreReport> frames, double tolerance) {
  ScoreReport r;
  r.tolerance = tolerance;
  std::size_t matched = 0;
  for (const auto& f : frames) {
    r.gt_groups += f.gt_groups;
    r.pred_groups += f.pred_groups;
    matched += f.matches.size();
  }
  if (r.gt_groups == 0 && r.pred_groups == 0) {
    r.precision = r.recall = r.f1 = 1.0;
    r.vacuous = true;
    return r;
  }
  const double m = static_cast<double>(matched);
  r.precision = r.pred_groups ? m / static_cast<double>(r.pred_groups) : 0.0;
  r.recall = r.gt_groups ? m / static_cast<double>(r.gt_groups) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace fform
