#pragma once

// Experiment runner: config files, macroreplications, metrics and CSV output.
//
// Config grammar (one `key = value` per line, `#` or `;` starts a comment):
//
//   [experiment]   objective, optimizers (comma list of cglo, rs, gp-ei-ocba),
//                  macroreps, checkpoints (comma list), budget, seed, output
//   [cglo]         n0, K, init_reps, r_min, b2, kappa_coef, v, mean_lo, mean_hi,
//                  candidate_count, local_grid_size, refit_every,
//                  max_local_points, max_iterations, fit_starts, refit_starts,
//                  cv_retries
//   [rs]           points, reps_per_point
//   [gp-ei-ocba]   n0, init_reps, r_min, b2, grid_size, refit_every,
//                  fit_starts, refit_starts, max_iterations
//
// budget defaults to the largest checkpoint and is shared by all optimizers.

#include "cglo/baselines.hpp"
#include "cglo/driver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cglo {

struct ExperimentSpec {
  std::string objective = "sun2d";
  std::vector<std::string> optimizers{"cglo"};
  std::size_t macroreps = 1;
  std::vector<long long> checkpoints;
  long long budget = 0;  // 0: largest checkpoint
  std::uint64_t master_seed = 0;
  std::string output_dir = "results";
  CGLOConfig cglo;
  RandomSearchConfig rs;
  GpEiConfig gp;

  long long resolved_budget() const;
};

/// Parses the config text. Errors carry "<source>:<line>: " prefixes.
ExperimentSpec parse_experiment(std::istream& in, const std::string& source = "<config>");
ExperimentSpec load_experiment(const std::string& path);

/// Checks budget arithmetic, K against n0 and candidate coverage for every
/// listed optimizer. Throws ConfigError.
void validate(const ExperimentSpec& spec);

/// Resolved configuration, every default filled in, in config syntax.
std::string echo_config(const ExperimentSpec& spec);

struct RepRow {
  std::string optimizer;
  std::size_t macrorep = 0;
  std::uint64_t seed = 0;
  long long checkpoint = 0;
  bool complete = true;
  double dx = 0.0;
  double dy = 0.0;
  double best_mean = 0.0;
  /// |f(best_x) - f(x*)| on the noise-free function; not part of the summary.
  double dy_true = 0.0;
};

struct SummaryRow {
  std::string optimizer;
  long long checkpoint = 0;
  std::size_t count = 0;  // complete rows
  double mean_dx = 0.0;
  double std_dx = 0.0;
  double mean_dy = 0.0;
  double std_dy = 0.0;
};

struct ExperimentResult {
  std::vector<RepRow> reps;
  std::vector<SummaryRow> summary;
  /// traces[optimizer index][macrorep]
  std::vector<std::vector<RunTrace>> traces;
};

RunResult run_optimizer(const std::string& optimizer, const StochasticObjective& objective,
                        const ExperimentSpec& spec, std::uint64_t seed);

/// Metrics of the incumbent at each checkpoint: the last trace row whose
/// consumed budget does not exceed it. A checkpoint beyond the final consumed
/// budget is marked incomplete.
std::vector<RepRow> checkpoint_metrics(const StochasticObjective& objective, const RunTrace& trace,
                                       const std::vector<long long>& checkpoints);

/// Mean and sample standard deviation (0 for a single row) over complete rows.
std::vector<SummaryRow> summarize(const std::vector<RepRow>& reps, const std::vector<std::string>& optimizers,
                                  const std::vector<long long>& checkpoints);

/// Runs every macroreplication (concurrently, CGLO_WORKERS threads at most)
/// and, when write_files is set, writes reps.csv, summary.csv, config.ini and
/// traces/<optimizer>_<m>.csv under the output directory.
ExperimentResult run_experiment(const ExperimentSpec& spec, bool write_files = true);

/// Worker count from CGLO_WORKERS, defaulting to the OpenMP thread count.
int worker_count();

void write_trace_csv(std::ostream& out, const RunTrace& trace, std::size_t dim);
void emit_trace_csv(const RunTrace& trace, std::size_t dim, const std::string& path);
/// Parses a file written by emit_trace_csv (rows only; details and warnings are
/// not stored).
RunTrace read_trace_csv(const std::string& path);
RunTrace read_trace_csv(std::istream& in);

void write_reps_csv(std::ostream& out, const std::vector<RepRow>& reps);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);

}  // namespace cglo
