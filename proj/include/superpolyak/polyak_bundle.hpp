#pragma once

// Superlinear bundle step. Starting from y0 = x it builds points
//
//   y_i = y0 - A_i^+ [ f(y_j) - f* + <v_j, y0 - y_j> ]_{j < i},
//
// the closest point to y0 satisfying every linearization collected so far,
// and returns the best of them inside the ball ||y - y0|| <= tau * gap(y0).
// The loop stops early on rank deficiency, on leaving the ball, on a
// superlinear improvement gap(y_i) <= gap(y0)^(1 + eta_est), and on a zero gap.

#include "superpolyak/core.hpp"
#include "superpolyak/qr_bundle.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

namespace superpolyak {

inline constexpr double kZeroGapTol = 1e-15;

struct BundleConfig {
  double tau = 1.0;
  double eta_est = 1.0;
  Index max_steps = -1;  // -1: the ambient dimension

  void validate() const {
    if (!(tau > 0.0)) throw ConfigError("BundleConfig: tau must be positive");
    if (!(eta_est > 0.0 && eta_est <= 2.0)) throw ConfigError("BundleConfig: eta_est must be in (0, 2]");
  }
};

enum class BundleTermination { ExhaustedD, RankDeficient, LargeTravel, SuperlinearHit, ZeroGap };

inline std::string_view to_string(BundleTermination t) {
  switch (t) {
    case BundleTermination::ExhaustedD: return "exhausted_d";
    case BundleTermination::RankDeficient: return "rank_deficient";
    case BundleTermination::LargeTravel: return "large_travel";
    case BundleTermination::SuperlinearHit: return "superlinear_hit";
    case BundleTermination::ZeroGap: return "zero_gap";
  }
  return "unknown";
}

struct BundleOutcome {
  std::optional<Vector> candidate;
  BundleTermination termination = BundleTermination::ExhaustedD;
  std::int64_t g_calls_used = 0;
  std::int64_t f_calls_used = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  double start_gap = 0.0;
};

/// y0 - A^+ residuals, where residuals[j] = f(y_j) - f* + <v_j, y0 - y_j>.
inline Vector bundle_step(const IncrementalQr& state, const Vector& y0, const Vector& residuals) {
  return y0 - state.apply_pinv(residuals);
}

/// True when `gap` is a superlinear improvement over `start_gap`.
inline bool superlinear_improvement(double start_gap, double gap, double eta_est) {
  return start_gap < 1.0 && gap <= std::pow(start_gap, 1.0 + eta_est);
}

inline BundleOutcome run_bundle(const Oracle& oracle, const Vector& x, const BundleConfig& cfg,
                                OracleCounter& counter) {
  cfg.validate();
  const Index d = oracle.dim;
  const Index max_steps = cfg.max_steps < 1 ? d : std::min(cfg.max_steps, d);
  const OracleCounter at_entry = counter;

  BundleOutcome out;
  auto finish = [&](BundleTermination why) {
    out.termination = why;
    out.g_calls_used = counter.g_calls - at_entry.g_calls;
    out.f_calls_used = counter.f_calls - at_entry.f_calls;
    return out;
  };
  auto consider = [&](const Vector& y, double gy) {
    if (gy < out.best_gap) {
      out.best_gap = gy;
      out.candidate = y;
    }
  };

  const Vector& y0 = x;
  const double gap0 = gap(oracle, y0, counter);
  out.start_gap = gap0;
  if (gap0 <= 0.0) {
    out.candidate = y0;
    out.best_gap = gap0;
    return finish(BundleTermination::ZeroGap);
  }
  const double radius = cfg.tau * gap0;

  IncrementalQr qr = IncrementalQr::init(subgradient(oracle, y0, counter), max_steps + 1);
  Vector residuals(max_steps);
  residuals(0) = gap0;

  for (Index i = 1; i <= max_steps; ++i) {
    const Vector y = bundle_step(qr, y0, residuals.head(i));
    if ((y - y0).norm() > radius) return finish(BundleTermination::LargeTravel);

    const double gy = gap(oracle, y, counter);
    consider(y, gy);
    if (gy <= kZeroGapTol) {
      out.candidate = y;
      out.best_gap = gy;
      return finish(BundleTermination::ZeroGap);
    }
    if (superlinear_improvement(gap0, gy, cfg.eta_est)) {
      out.candidate = y;
      out.best_gap = gy;
      return finish(BundleTermination::SuperlinearHit);
    }
    // The gradient at the last point would never enter a solve.
    if (i == max_steps) break;

    const Vector v = subgradient(oracle, y, counter);
    const double r = gy + v.dot(y0 - y);
    if (qr.append(v) == AppendResult::RankDeficient) {
      Matrix a(i + 1, d);
      a.topRows(i) = qr.rows().transpose();
      a.row(i) = v.transpose();
      Vector rhs(i + 1);
      rhs.head(i) = residuals.head(i);
      rhs(i) = r;
      const Vector y_last = y0 - pinv_dense_oracle(a, rhs);
      if ((y_last - y0).norm() <= radius) consider(y_last, gap(oracle, y_last, counter));
      return finish(BundleTermination::RankDeficient);
    }
    residuals(i) = r;
  }
  return finish(BundleTermination::ExhaustedD);
}

inline BundleOutcome run_bundle(const Oracle& oracle, const Vector& x, const BundleConfig& cfg) {
  OracleCounter scratch;
  return run_bundle(oracle, x, cfg, scratch);
}

}  // namespace superpolyak
