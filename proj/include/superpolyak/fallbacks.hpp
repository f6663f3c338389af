#pragma once

// Linearly convergent fallback maps x -> A(x) and the loop that iterates one
// until the gap falls below a target.

#include "superpolyak/core.hpp"
#include "superpolyak/polyak_sgm.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace superpolyak {

/// A single-step map expected to contract toward the solution set near it:
/// ||A(x) - x_hat|| <= rho * dist(x, X*) for every projection x_hat of x.
/// Each application is counted as `calls_per_apply` mapping calls.
struct AlgorithmicMapping {
  std::function<Vector(const Vector&)> apply;
  std::int64_t calls_per_apply = 1;
  std::string name = "mapping";
};

using Projector = std::function<Vector(const Vector&)>;

/// x -> P2(P1(x)); one projection pair counts as one mapping call.
inline AlgorithmicMapping alternating_projection_map(Projector p1, Projector p2) {
  return {[p1 = std::move(p1), p2 = std::move(p2)](const Vector& x) { return p2(p1(x)); }, 1,
          "alternating_projections"};
}

inline AlgorithmicMapping fixed_point_map(std::function<Vector(const Vector&)> t) {
  return {std::move(t), 1, "fixed_point"};
}

/// The Polyak subgradient step as a mapping. Its subgradient and function
/// evaluations are charged as one mapping call.
inline AlgorithmicMapping polyak_mapping(Oracle oracle) {
  return {[oracle = std::move(oracle)](const Vector& x) { return polyak_step(oracle, x); }, 1,
          "polyak_sgm"};
}

enum class FallbackStatus { reached_target, budget_exhausted };

struct FallbackResult {
  Vector point;
  double gap = 0.0;
  FallbackStatus status = FallbackStatus::reached_target;
  std::int64_t applications = 0;
};

/// Iterates z_{i+1} = A(z_i) (at least once) until gap(z_{i+1}) <= target_gap.
/// Every application is recorded in `history` as a fallback step. When the
/// budget of applications runs out the best iterate seen (z0 included) is
/// returned with status budget_exhausted.
inline FallbackResult fallback_run(const AlgorithmicMapping& map, const Oracle& oracle,
                                   const Vector& z0, double target_gap, std::int64_t budget,
                                   OracleCounter& counter, RunHistory* history = nullptr,
                                   std::optional<double> z0_gap = std::nullopt) {
  if (budget < 1) throw ConfigError("fallback_run: budget must be at least 1");
  FallbackResult best{z0, z0_gap ? *z0_gap : gap(oracle, z0, counter),
                      FallbackStatus::budget_exhausted, 0};
  Vector z = z0;
  for (std::int64_t k = 0; k < budget; ++k) {
    z = map.apply(z);
    counter.mapping_calls += map.calls_per_apply;
    ++best.applications;
    const double gz = gap(oracle, z, counter);
    if (history != nullptr) record(*history, counter, gz, StepKind::fallback);
    if (gz <= target_gap) {
      best.point = std::move(z);
      best.gap = gz;
      best.status = FallbackStatus::reached_target;
      return best;
    }
    if (gz < best.gap) {
      best.point = z;
      best.gap = gz;
    }
  }
  return best;
}

}  // namespace superpolyak
