#pragma once

// Couples the bundle step with a linearly convergent fallback. Each outer
// iteration k first tries a bundle step with travel radius min(omega^k, tau_max);
// the candidate is accepted when it shrinks the gap below gamma * gap(x_k).
// Otherwise the fallback map is iterated until that reduction is reached.

#include "superpolyak/core.hpp"
#include "superpolyak/fallbacks.hpp"
#include "superpolyak/polyak_bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

namespace superpolyak {

struct SuperConfig {
  double eps = 1e-12;
  double omega = 1.5;
  double gamma = 0.5;
  double eta_est0 = 1.0;
  double eta_lb = 0.1;
  double q = 0.9;
  std::optional<double> tau_max = 1e10;
  std::int64_t max_outer = 10000;
  std::int64_t fallback_budget = 100000;
  /// Cap on subgradient + mapping evaluations over the whole run.
  std::int64_t max_oracle_calls = std::numeric_limits<std::int64_t>::max();
  Index max_bundle_steps = -1;

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("SuperConfig: eps must be positive");
    if (!(omega > 1.0)) throw ConfigError("SuperConfig: omega must exceed 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("SuperConfig: gamma must be in (0, 1)");
    if (!(omega * gamma < 1.0)) throw ConfigError("SuperConfig: omega * gamma must be below 1");
    if (!(eta_est0 > 0.0 && eta_est0 <= 2.0)) throw ConfigError("SuperConfig: eta_est0 must be in (0, 2]");
    if (!(eta_lb > 0.0 && eta_lb <= eta_est0)) throw ConfigError("SuperConfig: eta_lb must be in (0, eta_est0]");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("SuperConfig: q must be in (0, 1)");
    if (tau_max && !(*tau_max > 0.0)) throw ConfigError("SuperConfig: tau_max must be positive");
    if (max_outer < 1) throw ConfigError("SuperConfig: max_outer must be at least 1");
    if (fallback_budget < 1) throw ConfigError("SuperConfig: fallback_budget must be at least 1");
    if (max_oracle_calls < 1) throw ConfigError("SuperConfig: max_oracle_calls must be at least 1");
  }
};

/// Decay of the superlinear exponent estimate after an accepted bundle step
/// that was not a superlinear hit.
inline double update_eta(double eta_est, const SuperConfig& cfg) {
  return std::max(cfg.eta_lb, cfg.q * eta_est);
}

enum class SuperStatus { converged, budget_exhausted, stalled };

inline std::string_view to_string(SuperStatus s) {
  switch (s) {
    case SuperStatus::converged: return "converged";
    case SuperStatus::budget_exhausted: return "budget_exhausted";
    case SuperStatus::stalled: return "stalled";
  }
  return "unknown";
}

struct SuperResult {
  Vector point;
  double gap = 0.0;
  SuperStatus status = SuperStatus::converged;
  RunHistory history;
  OracleCounter counter;
  std::int64_t outer_iterations = 0;
  std::int64_t bundle_accepted = 0;
  std::int64_t bundle_rejected = 0;
  /// Set when some fallback call ran out of budget before reaching its target.
  bool fallback_exhausted = false;
  double eta_est = 1.0;
  /// gap(x_k) for k = 0, 1, ... (outer iterates only).
  std::vector<double> outer_gaps;
};

inline SuperResult run_superpolyak(const Oracle& oracle, const AlgorithmicMapping& fallback,
                                   const Vector& x0, const SuperConfig& cfg) {
  cfg.validate();
  SuperResult res;
  auto& counter = res.counter;
  auto& history = res.history;

  Vector x = x0;
  double gx = gap(oracle, x, counter);
  record(history, counter, gx, StepKind::init);
  res.outer_gaps.push_back(gx);
  res.eta_est = cfg.eta_est0;

  auto finish = [&](SuperStatus status) {
    res.point = std::move(x);
    res.gap = gx;
    res.status = status;
    return std::move(res);
  };

  for (std::int64_t k = 0;; ++k) {
    if (gx <= cfg.eps) return finish(SuperStatus::converged);
    if (k >= cfg.max_outer || counter.complexity() >= cfg.max_oracle_calls) {
      return finish(SuperStatus::budget_exhausted);
    }

    double tau = std::pow(cfg.omega, static_cast<double>(k));
    if (cfg.tau_max) tau = std::min(tau, *cfg.tau_max);
    const BundleOutcome bundle =
        run_bundle(oracle, x, {tau, res.eta_est, cfg.max_bundle_steps}, counter);
    ++res.outer_iterations;

    if (bundle.candidate && bundle.best_gap < cfg.gamma * gx) {
      const bool superlinear = bundle.termination == BundleTermination::ZeroGap ||
                               superlinear_improvement(gx, bundle.best_gap, res.eta_est);
      if (!superlinear) res.eta_est = update_eta(res.eta_est, cfg);
      x = *bundle.candidate;
      gx = bundle.best_gap;
      ++res.bundle_accepted;
      record(history, counter, gx, StepKind::bundle_accepted);
    } else {
      ++res.bundle_rejected;
      record(history, counter, gx, StepKind::bundle_rejected);
      const std::int64_t remaining = cfg.max_oracle_calls - counter.complexity();
      if (remaining < 1) return finish(SuperStatus::budget_exhausted);
      FallbackResult fb = fallback_run(fallback, oracle, x, cfg.gamma * gx,
                                       std::min(cfg.fallback_budget, remaining), counter,
                                       &history, gx);
      if (fb.status == FallbackStatus::budget_exhausted) {
        res.fallback_exhausted = true;
        if (!(fb.gap < gx)) return finish(SuperStatus::stalled);
      }
      x = std::move(fb.point);
      gx = fb.gap;
    }
    res.outer_gaps.push_back(gx);
  }
}

}  // namespace superpolyak
