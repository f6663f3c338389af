// superpolyak_cli solve --problem <name> --d <int> [options] --out <dir>

#include "superpolyak/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace superpolyak;

int solve(const harness::ExperimentConfig& cfg) {
  const auto result = harness::run_experiment(cfg);
  for (const auto& row : result.summary) {
    std::cout << row.run << ": gap " << harness::format_gap(row.final_gap) << ", oracle calls "
              << row.total_oracle_calls << ", " << row.status << '\n';
  }
  return result.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SuperPolyak experiment runner"};
  app.require_subcommand(1);
  CLI::App* cmd = app.add_subcommand("solve", "Run SuperPolyak and a baseline on a generated instance");
  app.set_config("--config", "", "Key-value config file with a [solve] section; command-line flags take precedence");

  std::string problem;
  std::optional<Index> d, r, m, s;
  double kappa = 1.0;
  double lambda = 0.1;
  std::string ensemble = "gaussian";
  std::uint64_t seed = 0;
  SuperConfig solver;
  std::optional<std::int64_t> max_oracle;
  std::string baseline;
  std::string out;
  bool literal_prox = false;
  bool dump_instance = false;

  cmd->add_option("--problem", problem, "matrix_sensing | max_linear | phase_retrieval | compressed_sensing")
      ->required();
  cmd->add_option("--d", d, "Ambient dimension")->required();
  cmd->add_option("--r", r, "Rank (matrix_sensing) or number of pieces (max_linear)");
  cmd->add_option("--m", m, "Number of measurements");
  cmd->add_option("--s", s, "Sparsity (compressed_sensing)");
  cmd->add_option("--kappa", kappa, "Condition number of the planted factors")->capture_default_str();
  cmd->add_option("--lambda", lambda, "l1 penalty (compressed_sensing)")->capture_default_str();
  cmd->add_option("--ensemble", ensemble, "gaussian | hadamard")->capture_default_str();
  cmd->add_option("--seed", seed, "Root seed")->capture_default_str();
  cmd->add_option("--eps", solver.eps, "Target gap")->capture_default_str();
  cmd->add_option("--omega", solver.omega, "Radius growth factor")->capture_default_str();
  cmd->add_option("--gamma", solver.gamma, "Required gap reduction per outer step")->capture_default_str();
  cmd->add_option("--max-oracle", max_oracle, "Budget of subgradient plus mapping calls per run");
  cmd->add_option("--baseline", baseline, "polyak_sgm | alternating_projections | fixed_point | prox_gradient");
  cmd->add_option("--out", out, "Output directory")->required();
  cmd->add_flag("--literal-prox", literal_prox, "Threshold with lambda instead of step * lambda");
  cmd->add_flag("--dump-instance", dump_instance, "Also write instance.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    harness::ExperimentConfig cfg;
    cfg.problem = harness::parse_problem(problem);
    cfg.d = d;
    cfg.r = r;
    cfg.m = m;
    cfg.s = s;
    cfg.kappa = kappa;
    cfg.lambda = lambda;
    cfg.ensemble = harness::parse_ensemble(ensemble);
    cfg.literal_prox = literal_prox;
    cfg.seed = seed;
    cfg.solver = solver;
    if (max_oracle) cfg.solver.max_oracle_calls = *max_oracle;
    if (!baseline.empty()) cfg.baseline = harness::parse_baseline(baseline);
    cfg.output_dir = out;
    cfg.dump_instance = dump_instance;
    cfg.validate();
    return solve(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << cmd->help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
