// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "superpolyak/harness.hpp"
#include "superpolyak/polyak_bundle.hpp"
#include "superpolyak/polyak_sgm.hpp"
#include "superpolyak/qr_bundle.hpp"
#include "superpolyak/superpolyak.hpp"
#include "test_util.hpp"

#include <Eigen/QR>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

namespace sp = superpolyak;
namespace pb = superpolyak::problems;
namespace hs = superpolyak::harness;
using sp::Index;
using sp::Matrix;
using sp::Vector;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict pinv_equivalence() {
  auto rng = pb::make_rng(1, pb::Stream::auxiliary);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index d = std::uniform_int_distribution<Index>(1, 200)(rng);
    const Index i = std::uniform_int_distribution<Index>(1, d)(rng);
    const Matrix a = pb::gaussian_matrix(rng, i, d);
    const Vector w = pb::gaussian_vector(rng, i);
    auto qr = sp::IncrementalQr::init(a.row(0).transpose());
    for (Index k = 1; k < i; ++k) {
      if (qr.append(a.row(k).transpose()) != sp::AppendResult::Updated) {
        return {false, fmt("unexpected rank deficiency at d=%ld i=%ld", long(d), long(k))};
      }
    }
    const Vector ref = sp::pinv_dense_oracle(a, w);
    worst = std::max(worst, (qr.apply_pinv(w) - ref).norm() / std::max(1.0, ref.norm()));
  }
  return {worst <= 1e-8, fmt("1000 factorizations, worst relative error %.3g (limit 1e-8)", worst)};
}

Verdict bundle_cost() {
  const Index d = 400;
  auto rng = pb::make_rng(2, pb::Stream::auxiliary);
  const Matrix rows = pb::gaussian_matrix(rng, d, d);
  const Vector residuals = pb::gaussian_vector(rng, d);
  const Vector y0 = pb::gaussian_vector(rng, d);

  auto t0 = std::chrono::steady_clock::now();
  auto qr = sp::IncrementalQr::init(rows.row(0).transpose(), d);
  Vector y_fast = sp::bundle_step(qr, y0, residuals.head(1));
  for (Index i = 1; i < d; ++i) {
    qr.append(rows.row(i).transpose());
    y_fast = sp::bundle_step(qr, y0, residuals.head(i + 1));
  }
  const double t_fast = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  Vector y_dense;
  for (Index i = 1; i <= d; ++i) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(rows.topRows(i));
    y_dense = y0 - cod.solve(residuals.head(i));
  }
  const double t_dense = seconds_since(t0);
  const double agree = (y_fast - y_dense).norm() / std::max(1.0, y_dense.norm());
  const double ratio = t_dense / t_fast;
  return {ratio >= 5.0 && agree <= 1e-8,
          fmt("d=400: incremental %.3fs, dense recompute %.3fs, speedup %.1fx (need 5x), final points agree to %.2g",
              t_fast, t_dense, ratio, agree)};
}

Verdict one_step_contraction() {
  auto rng = pb::make_rng(3, pb::Stream::auxiliary);
  double worst = 0.0;
  for (Index d : {10, 100}) {
    const auto o = sp::testing::l1_oracle(d);
    const double rho = std::sqrt(1.0 - 1.0 / (4.0 * static_cast<double>(d)));
    for (int k = 0; k < 100; ++k) {
      const Vector x = pb::gaussian_vector(rng, d);
      worst = std::max(worst, sp::polyak_step(o, x).norm() / (rho * x.norm()));
    }
  }
  return {worst <= 1.0, fmt("200 points, worst ||step(x)|| / (rho ||x||) = %.4f (limit 1)", worst)};
}

Verdict bundle_exactness() {
  auto rng = pb::make_rng(4, pb::Stream::auxiliary);
  int ok = 0;
  double worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const Index d = std::uniform_int_distribution<Index>(5, 40)(rng);
    const Index active = std::uniform_int_distribution<Index>(2, d)(rng);
    const double center_norm = 100.0;
    const auto f = sp::testing::make_max_affine(rng, d, active, d, center_norm, 0.1 * center_norm);
    const Vector x0 = f.center + 0.1 * center_norm * pb::unit_sphere(rng, d);
    sp::OracleCounter c;
    const auto out = sp::run_bundle(f.oracle, x0, {1e6, 1.0, -1}, c);
    const double g = out.candidate ? out.best_gap : INFINITY;
    worst = std::max(worst, g);
    if (g <= 1e-12 && c.g_calls <= d) ++ok;
  }
  return {ok >= 95, fmt("%d/100 instances reached gap <= 1e-12 within d steps (need 95), worst gap %.3g", ok, worst)};
}

// (gap before, gap after) for every accepted bundle step of a run.
std::vector<std::pair<double, double>> accepted_steps(const sp::RunHistory& h) {
  std::vector<std::pair<double, double>> out;
  const auto& recs = h.records();
  for (std::size_t k = 1; k < recs.size(); ++k) {
    if (recs[k].step_kind == sp::StepKind::bundle_accepted) out.emplace_back(recs[k - 1].gap, recs[k].gap);
  }
  return out;
}

Verdict compressed_sensing() {
  int wins = 0;
  int tails = 0;
  std::string counts;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    hs::ExperimentConfig cfg;
    cfg.problem = hs::ProblemKind::compressed_sensing;
    cfg.d = 500;
    cfg.m = 50;
    cfg.s = 5;
    cfg.seed = seed;
    const auto p = hs::build_problem(cfg);
    const auto res = sp::run_superpolyak(p.oracle, p.fallback, p.start, cfg.solver);
    sp::OracleCounter base;
    const auto fb = sp::fallback_run(p.fallback, p.oracle, p.start, 1e-6, 1000000, base);
    const bool converged = res.status == sp::SuperStatus::converged && res.gap <= 1e-12;
    if (converged && fb.status == sp::FallbackStatus::reached_target &&
        res.counter.total() < base.total()) {
      ++wins;
    }
    const auto steps = accepted_steps(res.history);
    bool tail = !steps.empty();
    for (std::size_t k = steps.size() > 3 ? steps.size() - 3 : 0; k < steps.size(); ++k) {
      tail = tail && steps[k].second <= std::pow(steps[k].first, 1.4);
    }
    tails += tail && converged;
    counts += fmt(" %ld/%ld", long(res.counter.total()), long(base.total()));
  }
  return {wins >= 8 && tails == 10,
          fmt("fewer total calls on %d/10 seeds (need 8), superlinear tail on %d/10; superpolyak/prox-grad:%s", wins,
              tails, counts.c_str())};
}

Verdict phase_retrieval() {
  int wins = 0;
  std::string counts;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    hs::ExperimentConfig cfg;
    cfg.problem = hs::ProblemKind::phase_retrieval;
    cfg.d = 50;
    cfg.m = 200;
    cfg.seed = seed;
    const auto p = hs::build_problem(cfg);
    const auto res = sp::run_superpolyak(p.oracle, p.fallback, p.start, cfg.solver);
    sp::OracleCounter base;
    const auto fb = sp::fallback_run(p.fallback, p.oracle, p.start, 1e-10, 1000000, base);
    if (res.status == sp::SuperStatus::converged && res.gap <= 1e-12 &&
        fb.status == sp::FallbackStatus::reached_target && res.counter.complexity() < base.complexity()) {
      ++wins;
    }
    counts += fmt(" %ld/%ld", long(res.counter.complexity()), long(base.complexity()));
  }
  return {wins >= 8, fmt("fewer mapping+g calls on %d/10 seeds (need 8); superpolyak/AP:%s", wins, counts.c_str())};
}

Verdict matrix_sensing() {
  int ok = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    hs::ExperimentConfig cfg;
    cfg.problem = hs::ProblemKind::matrix_sensing;
    cfg.d = 50;
    cfg.r = 2;
    cfg.seed = seed;
    const auto p = hs::build_problem(cfg);
    const auto res = sp::run_superpolyak(p.oracle, p.fallback, p.start, cfg.solver);
    bool envelope = true;
    for (std::size_t k = 0; k < res.outer_gaps.size(); ++k) {
      envelope = envelope && res.outer_gaps[k] <= std::pow(cfg.solver.gamma, double(k)) * res.outer_gaps[0];
    }
    const bool pass = res.status == sp::SuperStatus::converged && res.gap <= 1e-12 && envelope &&
                      !res.fallback_exhausted;
    ok += pass;
    detail += fmt(" [gap %.2g, %ld outer, %ld calls%s]", res.gap, long(res.outer_iterations),
                  long(res.counter.complexity()), pass ? "" : ", FAILED");
  }
  return {ok == 5, fmt("%d/5 runs converged inside the gamma^k envelope:%s", ok, detail.c_str())};
}

std::vector<std::string> gap_column(const std::filesystem::path& file, std::string& header) {
  std::ifstream in(file);
  std::vector<std::string> out;
  std::getline(in, header);
  for (std::string line; std::getline(in, line);) {
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 3; ++k) std::getline(ss, cell, ',');
    out.push_back(cell);
  }
  return out;
}

Verdict determinism() {
  const auto root = std::filesystem::temp_directory_path() / "superpolyak_acceptance";
  std::filesystem::remove_all(root);
  bool ok = true;
  std::size_t rows = 0;
  for (auto problem : {hs::ProblemKind::compressed_sensing, hs::ProblemKind::phase_retrieval,
                       hs::ProblemKind::matrix_sensing, hs::ProblemKind::max_linear}) {
    hs::ExperimentConfig cfg;
    cfg.problem = problem;
    cfg.d = problem == hs::ProblemKind::compressed_sensing ? 200 : 12;
    cfg.r = 2;
    cfg.s = 4;
    cfg.seed = 7;
    cfg.solver.max_oracle_calls = 20000;
    std::vector<std::vector<std::string>> runs;
    for (int k = 0; k < 2; ++k) {
      cfg.output_dir = root / (std::string(hs::to_string(problem)) + std::to_string(k));
      hs::run_experiment(cfg);
      std::vector<std::string> cols;
      for (const char* f : {"superpolyak.csv", "baseline.csv"}) {
        std::string header;
        auto g = gap_column(cfg.output_dir / f, header);
        ok = ok && header == "idx,oracle_calls,f_gap,elapsed_sec,step_type";
        cols.insert(cols.end(), g.begin(), g.end());
      }
      runs.push_back(std::move(cols));
    }
    ok = ok && runs[0] == runs[1] && !runs[0].empty();
    rows += runs[0].size();
  }
  std::filesystem::remove_all(root);
  return {ok, fmt("4 problems run twice: headers exact and %zu gap cells byte-identical: %s", rows, ok ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "pseudoinverse oracle equivalence", 30.0, pinv_equivalence},
      {2, "incremental bundle build cost", 60.0, bundle_cost},
      {3, "one-step Polyak contraction", 5.0, one_step_contraction},
      {4, "bundle exactness on polyhedral instances", 30.0, bundle_exactness},
      {5, "compressed sensing vs prox-gradient", 120.0, compressed_sensing},
      {6, "phase retrieval vs alternating projections", 120.0, phase_retrieval},
      {7, "matrix sensing envelope", 180.0, matrix_sensing},
      {8, "determinism and CSV schema", 120.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double t = seconds_since(t0);
    const bool pass = v.pass && t <= c.limit;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s [%.2fs, limit %.0fs]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), t, c.limit);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
