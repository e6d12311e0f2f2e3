#include "cglo/harness.hpp"
#include "cglo/sampling.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace cglo;

namespace {

int cmd_run(const std::string& path) {
  const auto spec = load_experiment(path);
  const auto result = run_experiment(spec);
  write_summary_csv(std::cout, result.summary);
  std::cerr << "results written to " << spec.output_dir << "\n";
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto spec = load_experiment(path);
  validate(spec);
  std::cout << echo_config(spec);
  return 0;
}

int cmd_optimize(const std::string& objective_name, const std::string& optimizer, std::uint64_t seed,
                 long long budget, const std::string& out_dir) {
  ExperimentSpec spec;
  spec.objective = objective_name;
  spec.optimizers = {optimizer};
  spec.budget = budget;
  spec.checkpoints = {budget};
  spec.master_seed = seed;
  const auto objective = [&] {
    try {
      return make_objective(objective_name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  if (objective.dim() == 2) {
    spec.cglo.n0 = 40;
    spec.cglo.r_min = 10;
    spec.gp.n0 = 40;
    spec.gp.r_min = 10;
  }
  validate(spec);
  const auto r = run_optimizer(optimizer, objective, spec, seed);
  for (const auto& w : r.trace.warnings) std::cerr << "warning: " << w << "\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    emit_trace_csv(r.trace, objective.dim(), (std::filesystem::path(out_dir) / "trace.csv").string());
  } else {
    write_trace_csv(std::cout, r.trace, objective.dim());
  }
  std::cerr << "best x =";
  for (Eigen::Index i = 0; i < r.best_x.size(); ++i) std::cerr << ' ' << r.best_x[i];
  std::cerr << "  best mean = " << r.best_mean << "\n";
  return 0;
}

int cmd_oracle(const std::string& objective_name, std::size_t grid) {
  const auto objective = [&] {
    try {
      return make_objective(objective_name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const std::size_t d = objective.dim();
  if (grid < 2) throw ConfigError("--grid must be >= 2");
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= grid;
  Vector best_x;
  double best = std::numeric_limits<double>::infinity();
  Vector u(to_index(d));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t j = 0; j < d; ++j) {
      u[to_index(j)] = static_cast<double>(rest % grid) / static_cast<double>(grid - 1);
      rest /= grid;
    }
    const Vector x = objective.bounds().from_unit(u);
    const double f = objective.mean(x);
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  std::printf("grid_min_x =");
  for (Eigen::Index i = 0; i < best_x.size(); ++i) std::printf(" %.6f", best_x[i]);
  std::printf("\ngrid_min_value = %.6f\n", objective.to_reported(best));
  if (const auto& opt = objective.true_opt()) {
    std::printf("recorded_x =");
    for (Eigen::Index i = 0; i < opt->x.size(); ++i) std::printf(" %.6f", opt->x[i]);
    std::printf("\nrecorded_value = %.6f\n", objective.to_reported(opt->value));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global/local GP surrogate optimizer and benchmark harness"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run a full experiment from a config file");
  run->add_option("config", config, "Config file")->required();

  auto* val = app.add_subcommand("validate", "Check a config file and print the resolved settings");
  val->add_option("config", config, "Config file")->required();

  std::string objective;
  std::string optimizer;
  std::uint64_t seed = 0;
  long long budget = 5000;
  std::string out_dir;
  auto* opt = app.add_subcommand("optimize", "Single optimizer run");
  opt->add_option("objective", objective, "paper1d or sun2d")->required();
  opt->add_option("optimizer", optimizer, "cglo, rs or gp-ei-ocba")->required();
  opt->add_option("--seed", seed, "Seed");
  opt->add_option("--budget", budget, "Replication budget");
  opt->add_option("--out", out_dir, "Directory for trace.csv (stdout when omitted)");

  std::size_t grid = 1000;
  auto* orc = app.add_subcommand("oracle", "Dense-grid estimate of the true optimum");
  orc->add_option("objective", objective, "paper1d or sun2d")->required();
  orc->add_option("--grid", grid, "Grid points per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config);
    if (*val) return cmd_validate(config);
    if (*opt) return cmd_optimize(objective, optimizer, seed, budget, out_dir);
    if (*orc) return cmd_oracle(objective, grid);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
