#pragma once

// Seeded scenario generators shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fform/evaluation.hpp"
#include "fform/imaging.hpp"
#include "fform/placement.hpp"
#include "oracles.hpp"

namespace scenario {

struct GradientCase {
  fform::Vec2 center;
  fform::SymMat2 fresh;
  std::vector<fform::GaussianSummary> existing;
  fform::PlacementParams params;
};

inline fform::SymMat2 random_covariance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(0.1, 1.2);
  std::uniform_real_distribution<double> a(0.0, fform::kTwoPi);
  const double l1 = s(rng);
  const double l2 = s(rng);
  return fform::rotate(fform::SymMat2{l1 * l1, 0.0, l2 * l2}, a(rng));
}

/// Smallest |argument| over every hinge in the configuration.
inline double kink_margin(const GradientCase& c) {
  const double r_d = *c.params.r_d;
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& e : c.existing) {
    const fform::Vec2 delta = e.mu - c.center;
    const double len = fform::norm(delta);
    const fform::Vec2 u = delta * (1.0 / len);
    const double d = fform::center_distance(c.center, e.mu, c.params.distance_mode);
    const double sf = fform::spread_along(c.fresh, u);
    const double se = fform::spread_along(e.sigma, u);
    margin = std::min({margin, std::abs(r_d * sf + c.params.beta - d), std::abs(r_d * se + c.params.beta - d),
                       std::abs(c.params.gamma - d)});
  }
  return margin;
}

/// Random configuration whose hinges are all at least `min_margin` from a kink
/// and whose centers are at least 0.3 m apart.
inline GradientCase random_gradient_case(std::mt19937_64& rng, double min_margin = 1e-3) {
  std::uniform_real_distribution<double> pos(-6.0, 6.0);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> rd(0.5, 4.0);
  std::uniform_real_distribution<double> theta(0.0, 0.5);
  std::bernoulli_distribution coin(0.5);
  for (;;) {
    GradientCase c;
    c.params.r_d = rd(rng);
    c.params.theta = theta(rng);
    c.params.distance_mode = coin(rng) ? fform::DistanceMode::kEuclidean : fform::DistanceMode::kLiteralSquared;
    c.params.third_term_mode =
        coin(rng) ? fform::ThirdTermMode::kPenalizeNear : fform::ThirdTermMode::kPenalizeFar;
    c.center = {pos(rng), pos(rng)};
    c.fresh = random_covariance(rng);
    const int n = count(rng);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      c.existing.push_back({{pos(rng), pos(rng)}, random_covariance(rng)});
      if (fform::norm(c.existing.back().mu - c.center) < 0.3) ok = false;
    }
    if (ok && kink_margin(c) > min_margin) return c;
  }
}

/// max over components of |analytic - fd| / max(|fd|, 1e-8), central differences.
inline double gradient_relative_error(const GradientCase& c, double h = 1e-5) {
  const fform::Vec2 g = fform::loss_gradient_at(c.center, c.fresh, c.existing, c.params);
  auto f = [&](fform::Vec2 x) { return fform::scene_loss_at(x, c.fresh, c.existing, c.params); };
  const double fx = (f(c.center + fform::Vec2{h, 0}) - f(c.center - fform::Vec2{h, 0})) / (2 * h);
  const double fy = (f(c.center + fform::Vec2{0, h}) - f(c.center - fform::Vec2{0, h})) / (2 * h);
  const double scale = std::max({std::abs(fx), std::abs(fy), 1e-8});
  return std::max(std::abs(g.x - fx), std::abs(g.y - fy)) / scale;
}

/// Boxes on a 1/8-pixel lattice or with arbitrary fractional corners.
inline std::vector<fform::BoundingBox> random_boxes(std::mt19937_64& rng, bool lattice) {
  std::uniform_int_distribution<int> count(2, 7);
  std::uniform_real_distribution<double> x(0.0, 100.0);
  std::uniform_real_distribution<double> w(5.0, 40.0);
  std::uniform_int_distribution<int> depth(1, 6);
  auto snap = [&](double v) { return lattice ? std::round(v * 8.0) / 8.0 : v; };
  std::vector<fform::BoundingBox> boxes;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    fform::BoundingBox b;
    b.person_id = "p" + std::to_string(i);
    b.x1 = snap(x(rng));
    b.y1 = snap(x(rng));
    b.x2 = b.x1 + snap(w(rng));
    b.y2 = b.y1 + snap(w(rng));
    b.depth = depth(rng);  // repeated depths exercise the id tiebreak
    boxes.push_back(b);
  }
  return boxes;
}

/// Random symmetric affinity matrix with unit diagonal; about `density` of the
/// off-diagonal values sit at or above 0.5.
inline fform::AffinityMatrix random_affinity(std::mt19937_64& rng, std::size_t n, double density = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  fform::AffinityMatrix m;
  for (std::size_t i = 0; i < n; ++i) m.ids.push_back("id" + std::to_string(i));
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = u(rng) < density ? 0.5 + 0.5 * u(rng) : 0.5 * u(rng);
      m.values[i * n + j] = m.values[j * n + i] = v;
    }
  }
  return m;
}

/// Random partition of ids "a".."?" into at most `max_groups` groups.
inline fform::GroupPartition random_partition(std::mt19937_64& rng, const std::vector<std::string>& ids,
                                              std::size_t max_groups) {
  std::uniform_int_distribution<std::size_t> pick(0, max_groups);  // max_groups == "unassigned"
  std::vector<std::vector<std::string>> groups(max_groups);
  for (const auto& id : ids) {
    const std::size_t g = pick(rng);
    if (g < max_groups) groups[g].push_back(id);
  }
  fform::GroupPartition p;
  for (auto& g : groups) {
    if (!g.empty()) p.groups.push_back(std::move(g));
  }
  p.canonicalize();
  return p;
}

inline std::vector<std::set<std::string>> as_sets(const fform::GroupPartition& p, bool drop_singletons) {
  std::vector<std::set<std::string>> out;
  for (const auto& g : p.groups) {
    if (drop_singletons && g.size() < 2) continue;
    out.emplace_back(g.begin(), g.end());
  }
  return out;
}

}  // namespace scenario
