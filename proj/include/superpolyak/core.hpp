#pragma once

// Problem-oracle abstraction and per-run bookkeeping shared by every solver.

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace superpolyak {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised for malformed problem or solver parameters (bad shapes, invalid
/// constants, dimension mismatches).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the first generalized gradient of a bundle vanishes at a
/// point that is not optimal for the model.
class ZeroGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A minimization problem with known optimal value.
///
/// `eval_g` must return one deterministic element of the generalized gradient
/// mapping; tie-breaking at kinks is documented by each problem generator.
/// An Oracle is immutable after construction and may be shared between
/// concurrent runs as long as the captured callables are reentrant.
struct Oracle {
  Index dim = 0;
  std::function<double(const Vector&)> eval_f;
  double f_star = 0.0;
  std::function<Vector(const Vector&)> eval_g;
};

/// Constants of the sharpness / (b)-regularity model. Diagnostics only; no
/// solver reads these.
struct RegularityMetadata {
  std::optional<double> mu;
  std::optional<double> lipschitz_L;
  std::optional<double> c_b;
  std::optional<double> eta;
};

struct OracleCounter {
  std::int64_t f_calls = 0;
  std::int64_t g_calls = 0;
  std::int64_t mapping_calls = 0;

  /// Oracle complexity: generalized-gradient evaluations plus fallback-map
  /// applications. This is the x-axis of every convergence trace.
  [[nodiscard]] std::int64_t complexity() const { return g_calls + mapping_calls; }
  [[nodiscard]] std::int64_t total() const { return f_calls + g_calls + mapping_calls; }
};

enum class StepKind { init, fallback, bundle_accepted, bundle_rejected };

inline std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::init: return "init";
    case StepKind::fallback: return "fallback";
    case StepKind::bundle_accepted: return "bundle_accepted";
    case StepKind::bundle_rejected: return "bundle_rejected";
  }
  return "unknown";
}

struct RunRecord {
  std::int64_t cumulative_oracle_calls = 0;
  double gap = 0.0;
  double elapsed_seconds = 0.0;
  StepKind step_kind = StepKind::init;
};

/// Per-run trace. The clock starts when the history is constructed.
class RunHistory {
 public:
  using Clock = std::chrono::steady_clock;

  RunHistory() : start_(Clock::now()) {}

  [[nodiscard]] const std::vector<RunRecord>& records() const { return records_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] bool empty() const { return records_.empty(); }
  [[nodiscard]] const RunRecord& back() const { return records_.back(); }

  [[nodiscard]] double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  void push(RunRecord rec) { records_.push_back(rec); }

 private:
  Clock::time_point start_;
  std::vector<RunRecord> records_;
};

/// Appends one record carrying the counter's current oracle complexity.
inline RunHistory& record(RunHistory& history, const OracleCounter& counter, double gap,
                          StepKind kind) {
  history.push({counter.complexity(), gap, history.elapsed(), kind});
  return history;
}

inline void check_dim(const Oracle& oracle, const Vector& x) {
  if (x.size() != oracle.dim) {
    throw ConfigError("point has dimension " + std::to_string(x.size()) +
                      ", oracle expects " + std::to_string(oracle.dim));
  }
}

/// f(x) - f*. Never clamped: a tiny negative value at the solution is
/// returned as computed.
inline double gap(const Oracle& oracle, const Vector& x, OracleCounter& counter) {
  check_dim(oracle, x);
  ++counter.f_calls;
  return oracle.eval_f(x) - oracle.f_star;
}

inline double gap(const Oracle& oracle, const Vector& x) {
  OracleCounter scratch;
  return gap(oracle, x, scratch);
}

inline Vector subgradient(const Oracle& oracle, const Vector& x, OracleCounter& counter) {
  check_dim(oracle, x);
  ++counter.g_calls;
  return oracle.eval_g(x);
}

}  // namespace superpolyak
