#pragma once

// Experiment runner: builds a seeded problem instance, runs SuperPolyak and a
// first-order baseline from the same start, and writes CSV trajectories plus a
// summary table.

#include "superpolyak/core.hpp"
#include "superpolyak/fallbacks.hpp"
#include "superpolyak/polyak_sgm.hpp"
#include "superpolyak/problems/serialize.hpp"
#include "superpolyak/superpolyak.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace superpolyak::harness {

enum class ProblemKind { matrix_sensing, max_linear, phase_retrieval, compressed_sensing };
enum class BaselineKind { polyak_sgm, alternating_projections, fixed_point, prox_gradient };

inline std::string_view to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::matrix_sensing: return "matrix_sensing";
    case ProblemKind::max_linear: return "max_linear";
    case ProblemKind::phase_retrieval: return "phase_retrieval";
    case ProblemKind::compressed_sensing: return "compressed_sensing";
  }
  return "unknown";
}

inline std::string_view to_string(BaselineKind b) {
  switch (b) {
    case BaselineKind::polyak_sgm: return "polyak_sgm";
    case BaselineKind::alternating_projections: return "alternating_projections";
    case BaselineKind::fixed_point: return "fixed_point";
    case BaselineKind::prox_gradient: return "prox_gradient";
  }
  return "unknown";
}

inline ProblemKind parse_problem(std::string_view name) {
  for (auto p : {ProblemKind::matrix_sensing, ProblemKind::max_linear, ProblemKind::phase_retrieval,
                 ProblemKind::compressed_sensing})
    if (to_string(p) == name) return p;
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

inline BaselineKind parse_baseline(std::string_view name) {
  for (auto b : {BaselineKind::polyak_sgm, BaselineKind::alternating_projections, BaselineKind::fixed_point,
                 BaselineKind::prox_gradient})
    if (to_string(b) == name) return b;
  throw ConfigError("unknown baseline '" + std::string(name) + "'");
}

inline problems::Ensemble parse_ensemble(std::string_view name) {
  if (name == "gaussian") return problems::Ensemble::gaussian;
  if (name == "hadamard") return problems::Ensemble::hadamard;
  throw ConfigError("unknown ensemble '" + std::string(name) + "'");
}

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::compressed_sensing;
  std::optional<Index> d;
  std::optional<Index> r;
  std::optional<Index> m;
  std::optional<Index> s;
  double kappa = 1.0;
  double lambda = 0.1;
  bool literal_prox = false;
  problems::Ensemble ensemble = problems::Ensemble::gaussian;
  std::uint64_t seed = 0;
  SuperConfig solver;
  std::optional<BaselineKind> baseline;
  std::filesystem::path output_dir;
  bool dump_instance = false;

  [[nodiscard]] BaselineKind effective_baseline() const {
    if (baseline) return *baseline;
    switch (problem) {
      case ProblemKind::phase_retrieval: return BaselineKind::alternating_projections;
      case ProblemKind::compressed_sensing: return BaselineKind::prox_gradient;
      default: return BaselineKind::polyak_sgm;
    }
  }

  /// Problem size with the per-family default measurement count filled in.
  [[nodiscard]] Index effective_m() const {
    if (m) return *m;
    switch (problem) {
      case ProblemKind::matrix_sensing: return 3 * r.value_or(0) * d.value_or(0);
      case ProblemKind::max_linear: return 3 * d.value_or(0) * r.value_or(0);
      case ProblemKind::phase_retrieval: return 4 * d.value_or(0);
      case ProblemKind::compressed_sensing: return 10 * s.value_or(0);
    }
    return 0;
  }

  void validate() const {
    const auto need = [&](const std::optional<Index>& v, const char* flag) {
      if (!v) throw ConfigError(std::string(to_string(problem)) + " requires --" + flag);
      if (*v < 1) throw ConfigError(std::string("--") + flag + " must be positive");
    };
    need(d, "d");
    if (problem == ProblemKind::matrix_sensing || problem == ProblemKind::max_linear) need(r, "r");
    if (problem == ProblemKind::compressed_sensing) need(s, "s");
    if (m && *m < 1) throw ConfigError("--m must be positive");
    const BaselineKind b = effective_baseline();
    if (b == BaselineKind::alternating_projections && problem != ProblemKind::phase_retrieval) {
      throw ConfigError("alternating_projections baseline needs the phase_retrieval problem");
    }
    if ((b == BaselineKind::fixed_point || b == BaselineKind::prox_gradient) &&
        problem != ProblemKind::compressed_sensing) {
      throw ConfigError("fixed-point baselines need the compressed_sensing problem");
    }
    solver.validate();
  }
};

/// A generated instance with everything both runs need.
struct ExperimentProblem {
  Oracle oracle;
  AlgorithmicMapping fallback;
  Vector start;
  Vector planted;
  problems::Json dump;
};

inline ExperimentProblem build_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  using namespace problems;
  const Index d = *cfg.d;
  const Index m = cfg.effective_m();
  ExperimentProblem out;
  std::optional<AlgorithmicMapping> native;

  switch (cfg.problem) {
    case ProblemKind::matrix_sensing: {
      auto p = gen_matrix_sensing(d, *cfg.r, m, cfg.kappa, cfg.ensemble, cfg.seed);
      out.planted = p.instance->planted();
      out.dump = to_json(*p.instance);
      out.oracle = std::move(p.oracle);
      break;
    }
    case ProblemKind::max_linear: {
      auto p = gen_max_linear(d, *cfg.r, m, cfg.seed);
      out.planted = p.instance->planted();
      out.dump = to_json(*p.instance);
      out.oracle = std::move(p.oracle);
      break;
    }
    case ProblemKind::phase_retrieval: {
      auto p = gen_phase_retrieval(d, m, cfg.seed);
      out.planted = p.instance->planted();
      out.dump = to_json(*p.instance);
      out.oracle = std::move(p.oracle);
      native = std::move(p.mapping);
      break;
    }
    case ProblemKind::compressed_sensing: {
      auto p = gen_compressed_sensing(d, m, *cfg.s, cfg.lambda, cfg.seed, cfg.literal_prox);
      out.planted = p.instance->planted();
      out.dump = to_json(*p.instance);
      out.oracle = std::move(p.oracle);
      native = std::move(p.mapping);
      break;
    }
  }

  if (cfg.problem == ProblemKind::compressed_sensing) {
    out.start = Vector::Zero(out.oracle.dim);
  } else {
    Rng rng = make_rng(cfg.seed, Stream::initializer);
    out.start = relative_unit_start(rng, out.planted);
  }
  out.fallback = cfg.effective_baseline() == BaselineKind::polyak_sgm ? polyak_mapping(out.oracle) : *native;
  return out;
}

struct Trajectory {
  std::string name;
  RunHistory history;
  OracleCounter counter;
  double final_gap = 0.0;
  std::string status;
  bool reached_eps = false;
};

struct SummaryRow {
  std::string run;
  double final_gap = 0.0;
  std::int64_t total_oracle_calls = 0;
  std::int64_t g_calls = 0;
  std::int64_t mapping_calls = 0;
  std::int64_t f_calls = 0;
  double wall_seconds = 0.0;
  std::int64_t outer_iterations = 0;
  std::optional<double> bundle_acceptance_rate;
  std::string status;
};

inline SummaryRow summarize(const Trajectory& t) {
  SummaryRow row;
  row.run = t.name;
  row.final_gap = t.final_gap;
  row.total_oracle_calls = t.counter.total();
  row.g_calls = t.counter.g_calls;
  row.mapping_calls = t.counter.mapping_calls;
  row.f_calls = t.counter.f_calls;
  row.wall_seconds = t.history.empty() ? 0.0 : t.history.back().elapsed_seconds;
  row.status = t.status;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  for (const auto& rec : t.history.records()) {
    accepted += rec.step_kind == StepKind::bundle_accepted;
    rejected += rec.step_kind == StepKind::bundle_rejected;
  }
  row.outer_iterations = accepted + rejected;
  if (accepted + rejected > 0) {
    row.bundle_acceptance_rate = static_cast<double>(accepted) / static_cast<double>(accepted + rejected);
  }
  return row;
}

inline std::vector<SummaryRow> summarize(const std::vector<Trajectory>& trajectories) {
  std::vector<SummaryRow> rows;
  rows.reserve(trajectories.size());
  for (const auto& t : trajectories) rows.push_back(summarize(t));
  return rows;
}

inline constexpr std::string_view kTrajectoryHeader = "idx,oracle_calls,f_gap,elapsed_sec,step_type";
inline constexpr std::string_view kSummaryHeader =
    "run,final_gap,total_oracle_calls,g_calls,mapping_calls,f_calls,wall_sec,outer_iterations,"
    "bundle_acceptance_rate,status";

/// Shortest text that round-trips the double (17 significant digits).
inline std::string format_gap(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trajectory_csv(std::ostream& os, const RunHistory& history) {
  os << kTrajectoryHeader << '\n';
  char elapsed[32];
  std::size_t idx = 0;
  for (const auto& rec : history.records()) {
    std::snprintf(elapsed, sizeof elapsed, "%.6f", rec.elapsed_seconds);
    os << idx++ << ',' << rec.cumulative_oracle_calls << ',' << format_gap(rec.gap) << ',' << elapsed << ','
       << to_string(rec.step_kind) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    os << r.run << ',' << format_gap(r.final_gap) << ',' << r.total_oracle_calls << ',' << r.g_calls << ','
       << r.mapping_calls << ',' << r.f_calls << ',' << r.wall_seconds << ',' << r.outer_iterations << ','
       << (r.bundle_acceptance_rate ? format_gap(*r.bundle_acceptance_rate) : std::string("nan")) << ','
       << r.status << '\n';
  }
}

/// Worker cap from SUPERPOLYAK_THREADS, defaulting to the hardware concurrency.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("SUPERPOLYAK_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs independent jobs on at most `threads` workers. Jobs must not share
/// mutable state.
inline void run_parallel(const std::vector<std::function<void()>>& jobs, unsigned threads) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (threads == 1) {
    for (const auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < jobs.size(); k = next++) jobs[k]();
    });
  }
}

inline Trajectory run_superpolyak_trajectory(const ExperimentProblem& p, const SuperConfig& cfg) {
  SuperResult res = run_superpolyak(p.oracle, p.fallback, p.start, cfg);
  Trajectory t;
  t.name = "superpolyak";
  t.final_gap = res.gap;
  t.status = std::string(to_string(res.status));
  t.reached_eps = res.status == SuperStatus::converged;
  t.counter = res.counter;
  t.history = std::move(res.history);
  return t;
}

inline Trajectory run_baseline_trajectory(const ExperimentProblem& p, BaselineKind kind, const SuperConfig& cfg) {
  Trajectory t;
  t.name = std::string(to_string(kind));
  if (kind == BaselineKind::polyak_sgm) {
    const std::int64_t budget = cfg.max_oracle_calls == std::numeric_limits<std::int64_t>::max()
                                    ? cfg.fallback_budget
                                    : cfg.max_oracle_calls;
    const SgmResult res = run_sgm(p.oracle, p.start, {cfg.eps, budget}, t.history, t.counter);
    t.final_gap = res.gap;
    t.reached_eps = res.gap <= cfg.eps;
    t.status = res.status == SgmStatus::converged          ? "converged"
               : res.status == SgmStatus::budget_exhausted ? "budget_exhausted"
                                                           : "zero_subgradient";
    return t;
  }
  const double g0 = gap(p.oracle, p.start, t.counter);
  record(t.history, t.counter, g0, StepKind::init);
  if (g0 <= cfg.eps) {
    t.final_gap = g0;
    t.reached_eps = true;
    t.status = "converged";
    return t;
  }
  const std::int64_t budget = cfg.max_oracle_calls == std::numeric_limits<std::int64_t>::max()
                                  ? cfg.fallback_budget
                                  : cfg.max_oracle_calls;
  const FallbackResult res = fallback_run(p.fallback, p.oracle, p.start, cfg.eps, budget, t.counter, &t.history, g0);
  t.final_gap = res.gap;
  t.reached_eps = res.status == FallbackStatus::reached_target;
  t.status = t.reached_eps ? "converged" : "budget_exhausted";
  return t;
}

struct ExperimentResult {
  Trajectory superpolyak;
  Trajectory baseline;
  std::vector<SummaryRow> summary;
  /// 0 when both runs reached eps, 2 otherwise.
  int exit_status = 0;
};

/// Generates the instance, runs both solvers (concurrently when more than one
/// worker is allowed) and, when `output_dir` is set, writes superpolyak.csv,
/// baseline.csv and summary.csv there.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ExperimentProblem problem = build_problem(cfg);
  ExperimentResult out;
  const std::vector<std::function<void()>> jobs = {
      [&] { out.superpolyak = run_superpolyak_trajectory(problem, cfg.solver); },
      [&] { out.baseline = run_baseline_trajectory(problem, cfg.effective_baseline(), cfg.solver); },
  };
  run_parallel(jobs, worker_threads());
  out.summary = summarize(std::vector<Trajectory>{out.superpolyak, out.baseline});
  out.exit_status = out.superpolyak.reached_eps && out.baseline.reached_eps ? 0 : 2;

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto open = [&](const char* name) {
      std::ofstream os(cfg.output_dir / name);
      if (!os) throw std::runtime_error("cannot write " + (cfg.output_dir / name).string());
      return os;
    };
    {
      auto os = open("superpolyak.csv");
      write_trajectory_csv(os, out.superpolyak.history);
    }
    {
      auto os = open("baseline.csv");
      write_trajectory_csv(os, out.baseline.history);
    }
    {
      auto os = open("summary.csv");
      write_summary_csv(os, out.summary);
    }
    if (cfg.dump_instance) {
      auto os = open("instance.json");
      os << problem.dump.dump() << '\n';
    }
  }
  return out;
}

}  // namespace superpolyak::harness
