#pragma once

// Subgradient method with the Polyak step size (f(z) - f*) / ||v||^2.

#include "superpolyak/core.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace superpolyak {

inline constexpr double kZeroGradientRelTol = 1e-14;

struct SgmConfig {
  double eps = 1e-12;
  std::int64_t max_g_calls = 100000;

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("SgmConfig: eps must be positive");
    if (max_g_calls < 1) throw ConfigError("SgmConfig: max_g_calls must be at least 1");
  }
};

enum class SgmStatus { converged, budget_exhausted, zero_subgradient };

struct SgmResult {
  Vector point;
  double gap = 0.0;
  SgmStatus status = SgmStatus::converged;
  std::int64_t iterations = 0;
};

namespace detail {

// One Polyak update given a known gap and subgradient; returns z unchanged
// for a numerically zero subgradient.
inline bool polyak_update(Vector& z, double gap_z, const Vector& v) {
  const double vv = v.squaredNorm();
  if (std::sqrt(vv) <= kZeroGradientRelTol * std::max(1.0, std::abs(gap_z))) return false;
  z -= (gap_z / vv) * v;
  return true;
}

}  // namespace detail

inline Vector polyak_step(const Oracle& oracle, const Vector& z, OracleCounter& counter) {
  const double gz = gap(oracle, z, counter);
  const Vector v = subgradient(oracle, z, counter);
  Vector next = z;
  detail::polyak_update(next, gz, v);
  return next;
}

inline Vector polyak_step(const Oracle& oracle, const Vector& z) {
  OracleCounter scratch;
  return polyak_step(oracle, z, scratch);
}

/// Runs Polyak steps from z0 until the gap drops to cfg.eps. Each iteration
/// costs exactly one subgradient and one function evaluation. On budget
/// exhaustion the best iterate seen is returned.
inline SgmResult run_sgm(const Oracle& oracle, const Vector& z0, const SgmConfig& cfg,
                         RunHistory& history, OracleCounter& counter) {
  cfg.validate();
  Vector z = z0;
  double gz = gap(oracle, z, counter);
  record(history, counter, gz, StepKind::init);

  SgmResult best{z, gz, SgmStatus::converged, 0};
  if (gz <= cfg.eps) return best;

  for (std::int64_t it = 0; it < cfg.max_g_calls; ++it) {
    const Vector v = subgradient(oracle, z, counter);
    if (!detail::polyak_update(z, gz, v)) {
      best.status = SgmStatus::zero_subgradient;
      return best;
    }
    gz = gap(oracle, z, counter);
    record(history, counter, gz, StepKind::fallback);
    ++best.iterations;
    if (gz < best.gap) {
      best.point = z;
      best.gap = gz;
    }
    if (gz <= cfg.eps) {
      best.point = z;
      best.gap = gz;
      return best;
    }
  }
  best.status = SgmStatus::budget_exhausted;
  return best;
}

}  // namespace superpolyak
