#include "fform/placement.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fform/error.hpp"

namespace fform {

void PlacementParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kParameter, "placement: " + what); };
  if (!(beta >= 0.0)) fail("beta must be >= 0");
  if (!(gamma > 0.0)) fail("gamma must be > 0");
  if (!(theta >= 0.0)) fail("theta must be >= 0");
  if (!r_d) fail("r_d is not set");
  if (!(*r_d > 0.0) || !std::isfinite(*r_d)) fail("r_d must be finite and > 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (max_iters < 1) fail("max_iters must be >= 1");
  if (attempts < 1) fail("attempts must be >= 1");
  if (!(convergence_tol >= 0.0)) fail("convergence_tol must be >= 0");
}

double PlacementParams::ratio() const {
  if (!r_d) throw Error(ErrorKind::kParameter, "placement: r_d is not set");
  return *r_d;
}

namespace {

constexpr Vec2 kFixedAxis{1.0, 0.0};

struct PairTerms {
  double d = 0.0;
  double sigma_fresh = 0.0;     // sigma(N; i)
  double sigma_existing = 0.0;  // sigma(i; N)
};

PairTerms pair_terms(Vec2 center, const SymMat2& fresh_sigma, const GaussianSummary& existing, DistanceMode mode) {
  const Vec2 delta = existing.mu - center;
  const double len = norm(delta);
  const Vec2 dir = len > kDirectionEpsilon ? delta * (1.0 / len) : kFixedAxis;
  // the quadratic form is even in the direction, so sigma(i; N) may reuse `dir`
  return {center_distance(center, existing.mu, mode), spread_along(fresh_sigma, dir),
          spread_along(existing.sigma, dir)};
}

double third_term(double d, const PlacementParams& p) {
  return p.third_term_mode == ThirdTermMode::kPenalizeNear ? std::max(p.gamma - d, 0.0)
                                                         : std::max(d - p.gamma, 0.0);
}

double pair_loss(const PairTerms& t, const PlacementParams& p) {
  const double r_d = p.ratio();
  return std::max(r_d * t.sigma_fresh + p.beta - t.d, 0.0) +
         std::max(r_d * t.sigma_existing + p.beta - t.d, 0.0) + third_term(t.d, p);
}

// d/dc of sqrt(v^T S v / v^T v) with v = c - mu; zero when the floor is active.
Vec2 spread_gradient(const SymMat2& s, Vec2 v, double r2, double spread) {
  if (spread <= kSigmaFloor) return {};
  const double q = s.quadratic(v) / r2;
  const Vec2 sv = s * v;
  return (sv - q * v) * (1.0 / (r2 * spread));
}

std::vector<GaussianSummary> summarize_all(std::span<const GroupGeometry> groups) {
  std::vector<GaussianSummary> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(summarize_group(g));
  return out;
}

}  // namespace

double pairwise_loss(const GaussianSummary& fresh, const GaussianSummary& existing, const PlacementParams& p) {
  return pair_loss(pair_terms(fresh.mu, fresh.sigma, existing, p.distance_mode), p);
}

double scene_loss_at(Vec2 center, const SymMat2& fresh_sigma, std::span<const GaussianSummary> existing,
                     const PlacementParams& p) {
  if (existing.empty()) {
    throw Error(ErrorKind::kUndefinedLoss, "scene loss needs at least one existing group");
  }
  double hinge = 0.0;
  double reg = 0.0;
  for (const auto& e : existing) {
    const PairTerms t = pair_terms(center, fresh_sigma, e, p.distance_mode);
    hinge += pair_loss(t, p);
    reg += t.d;
  }
  const double n = static_cast<double>(existing.size());
  return hinge / n + p.theta * (reg / n);
}

Vec2 loss_gradient_at(Vec2 center, const SymMat2& fresh_sigma, std::span<const GaussianSummary> existing,
                      const PlacementParams& p) {
  if (existing.empty()) {
    throw Error(ErrorKind::kUndefinedLoss, "scene loss needs at least one existing group");
  }
  const double r_d = p.ratio();
  Vec2 hinge_grad;
  Vec2 reg_grad;
  for (const auto& e : existing) {
    const Vec2 v = center - e.mu;
    const double r2 = squared_norm(v);
    const double r = std::sqrt(r2);
    const PairTerms t = pair_terms(center, fresh_sigma, e, p.distance_mode);

    Vec2 grad_d;
    if (p.distance_mode == DistanceMode::kLiteralSquared) {
      grad_d = 2.0 * v;
    } else if (r > kDirectionEpsilon) {
      grad_d = v * (1.0 / r);
    }
    Vec2 grad_sf;
    Vec2 grad_se;
    if (r > kDirectionEpsilon) {
      grad_sf = spread_gradient(fresh_sigma, v, r2, t.sigma_fresh);
      grad_se = spread_gradient(e.sigma, v, r2, t.sigma_existing);
    }

    if (r_d * t.sigma_fresh + p.beta - t.d > 0.0) hinge_grad += r_d * grad_sf - grad_d;
    if (r_d * t.sigma_existing + p.beta - t.d > 0.0) hinge_grad += r_d * grad_se - grad_d;
    if (p.third_term_mode == ThirdTermMode::kPenalizeNear) {
      if (p.gamma - t.d > 0.0) hinge_grad += -1.0 * grad_d;
    } else {
      if (t.d - p.gamma > 0.0) hinge_grad += grad_d;
    }
    reg_grad += grad_d;
  }
  const double inv_n = 1.0 / static_cast<double>(existing.size());
  return hinge_grad * inv_n + reg_grad * (p.theta * inv_n);
}

double scene_loss(const GroupGeometry& fresh, std::span<const GroupGeometry> existing, const PlacementParams& p) {
  const GaussianSummary s = summarize_group(fresh);
  const auto others = summarize_all(existing);
  return scene_loss_at(s.mu, s.sigma, others, p);
}

Vec2 loss_gradient(const GroupGeometry& fresh, std::span<const GroupGeometry> existing, const PlacementParams& p) {
  const GaussianSummary s = summarize_group(fresh);
  const auto others = summarize_all(existing);
  return loss_gradient_at(s.mu, s.sigma, others, p);
}

Vec2 sample_initial_center(std::span<const GaussianSummary> existing, const PlacementParams& p,
                           std::uint64_t rng_seed) {
  if (existing.empty()) return {};
  Vec2 lo = existing.front().mu;
  Vec2 hi = lo;
  for (const auto& e : existing) {
    lo.x = std::min(lo.x, e.mu.x);
    lo.y = std::min(lo.y, e.mu.y);
    hi.x = std::max(hi.x, e.mu.x);
    hi.y = std::max(hi.y, e.mu.y);
  }
  lo = lo - Vec2{p.gamma, p.gamma};
  hi = hi + Vec2{p.gamma, p.gamma};
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const double w = unit(rng);
  return {lo.x + u * (hi.x - lo.x), lo.y + w * (hi.y - lo.y)};
}

namespace {

PlacementOutcome finish(const GroupGeometry& candidate, Vec2 candidate_mean, Vec2 center,
                        std::span<const GaussianSummary> existing, const PlacementParams& p, int iterations) {
  PlacementOutcome out;
  out.placed = transform_group(candidate, 0.0, center - candidate_mean);
  out.iterations = iterations;
  if (existing.empty()) {
    out.converged = true;
    return out;
  }
  // residuals come from the emitted geometry so they can be recomputed from files
  const GaussianSummary placed = summarize_group(out.placed);
  out.per_pair_hinge_residuals.reserve(existing.size());
  out.converged = true;
  for (const auto& e : existing) {
    const double r = pairwise_loss(placed, e, p);
    out.per_pair_hinge_residuals.push_back(r);
    if (r > kResidualTolerance) out.converged = false;
  }
  out.final_loss = scene_loss_at(placed.mu, placed.sigma, existing, p);
  return out;
}

}  // namespace

PlacementOutcome place_group_from(const GroupGeometry& candidate, std::span<const GroupGeometry> existing,
                                  const PlacementParams& p, Vec2 initial_center) {
  validate_group(candidate);
  p.validate();
  const GaussianSummary self = summarize_group(candidate);
  const auto others = summarize_all(existing);
  if (others.empty()) return finish(candidate, self.mu, {}, others, p, 0);

  Vec2 x = initial_center;
  Vec2 m;
  Vec2 v;
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(p.max_iters) + 1);
  history.push_back(scene_loss_at(x, self.sigma, others, p));
  Vec2 best = x;
  double best_loss = history.back();

  int t = 0;
  while (t < p.max_iters) {
    ++t;
    const Vec2 g = loss_gradient_at(x, self.sigma, others, p);
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * Vec2{g.x * g.x, g.y * g.y};
    beta1_t *= kAdamBeta1;
    beta2_t *= kAdamBeta2;
    const Vec2 m_hat = m * (1.0 / (1.0 - beta1_t));
    const Vec2 v_hat = v * (1.0 / (1.0 - beta2_t));
    x.x -= p.learning_rate * m_hat.x / (std::sqrt(v_hat.x) + kAdamEpsilon);
    x.y -= p.learning_rate * m_hat.y / (std::sqrt(v_hat.y) + kAdamEpsilon);

    const double loss = scene_loss_at(x, self.sigma, others, p);
    history.push_back(loss);
    // Adam oscillates across hinge kinks; keep the lowest-loss iterate seen.
    if (loss < best_loss) {
      best_loss = loss;
      best = x;
    }
    if (t >= kConvergenceWindow &&
        std::abs(loss - history[static_cast<std::size_t>(t - kConvergenceWindow)]) < p.convergence_tol) {
      break;
    }
  }
  return finish(candidate, self.mu, best, others, p, t);
}

PlacementOutcome place_group(const GroupGeometry& candidate, std::span<const GroupGeometry> existing,
                             const PlacementParams& p, std::uint64_t rng_seed) {
  if (existing.empty()) {
    validate_group(candidate);
    const GaussianSummary self = summarize_group(candidate);
    return finish(candidate, self.mu, {}, {}, p, 0);
  }
  p.validate();
  const auto others = summarize_all(existing);
  auto worst = [](const PlacementOutcome& o) {
    return *std::max_element(o.per_pair_hinge_residuals.begin(), o.per_pair_hinge_residuals.end());
  };

  std::mt19937_64 seeds(rng_seed);
  PlacementOutcome best;
  int total_iterations = 0;
  for (int a = 0; a < p.attempts; ++a) {
    // the first attempt uses rng_seed itself so a single attempt is reproducible by hand
    const std::uint64_t seed = a == 0 ? rng_seed : seeds();
    PlacementOutcome out = place_group_from(candidate, existing, p, sample_initial_center(others, p, seed));
    total_iterations += out.iterations;
    const bool better = a == 0 || worst(out) < worst(best) ||
                        (worst(out) == worst(best) && out.final_loss < best.final_loss);
    if (better) best = std::move(out);
    if (best.converged) break;
  }
  best.iterations = total_iterations;
  return best;
}

}  // namespace fform
