#pragma once

// Sequential group placement: pairwise hinge loss, regularized scene loss,
// its analytic subgradient, and an Adam solver over the new group's center.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fform/geometry.hpp"

namespace fform {

enum class ThirdTermMode {
  kPenalizeNear,  // max{gamma - d, 0}: penalizes being closer than gamma
  kPenalizeFar,  // max{d - gamma, 0}: penalizes being farther than gamma
};

struct PlacementParams {
  double beta = 0.4;
  double gamma = 2.0;
  double theta = 0.1;
  /// Distance-to-variance ratio. Unset means "estimate from the pool" at
  /// synthesis time; the placement functions themselves require a value.
  std::optional<double> r_d;
  double learning_rate = 5e-2;
  int max_iters = 500;
  double convergence_tol = 1e-6;
  /// Adam runs from up to this many seeded initializations, stopping at the
  /// first converged one; otherwise the lowest-residual attempt is kept.
  int attempts = 8;
  ThirdTermMode third_term_mode = ThirdTermMode::kPenalizeNear;
  DistanceMode distance_mode = DistanceMode::kEuclidean;

  /// Throws kParameter on any invariant violation (including unset r_d).
  void validate() const;
  double ratio() const;
  friend bool operator==(const PlacementParams&, const PlacementParams&) = default;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;
inline constexpr int kConvergenceWindow = 10;
/// A placement counts as converged when every pair residual is at most this.
inline constexpr double kResidualTolerance = 1e-3;

struct PlacementOutcome {
  GroupGeometry placed;
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> per_pair_hinge_residuals;  // one entry per existing group

  friend bool operator==(const PlacementOutcome&, const PlacementOutcome&) = default;
};

/// Sum of the three hinge terms for `fresh` against `existing`. Coincident
/// centers use the fixed axis (1, 0) for both spread terms.
double pairwise_loss(const GaussianSummary& fresh, const GaussianSummary& existing, const PlacementParams& p);

/// Mean pairwise loss plus theta times the mean distance to existing groups.
/// Throws kUndefinedLoss when `existing` is empty.
double scene_loss(const GroupGeometry& fresh, std::span<const GroupGeometry> existing, const PlacementParams& p);

/// Subgradient of scene_loss with respect to the new group's center. Kinks
/// take the zero branch.
Vec2 loss_gradient(const GroupGeometry& fresh, std::span<const GroupGeometry> existing, const PlacementParams& p);

// Summary-level forms used by the optimizer (existing groups summarized once).
double scene_loss_at(Vec2 center, const SymMat2& fresh_sigma, std::span<const GaussianSummary> existing,
                     const PlacementParams& p);
Vec2 loss_gradient_at(Vec2 center, const SymMat2& fresh_sigma, std::span<const GaussianSummary> existing,
                      const PlacementParams& p);

/// Uniform draw from the bounding rectangle of existing centers expanded by gamma.
Vec2 sample_initial_center(std::span<const GaussianSummary> existing, const PlacementParams& p,
                           std::uint64_t rng_seed);

/// Places `candidate` among `existing`. An empty scene anchors the candidate
/// at the origin; otherwise Adam runs from seeded initializations (see
/// PlacementParams::attempts). `iterations` counts Adam steps over all attempts.
PlacementOutcome place_group(const GroupGeometry& candidate, std::span<const GroupGeometry> existing,
                             const PlacementParams& p, std::uint64_t rng_seed);

/// A single Adam run from an explicit starting center.
PlacementOutcome place_group_from(const GroupGeometry& candidate, std::span<const GroupGeometry> existing,
                                  const PlacementParams& p, Vec2 initial_center);

}  // namespace fform
