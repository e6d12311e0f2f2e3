#pragma once

#include "cglo/acquisition.hpp"
#include "cglo/aglgp_model.hpp"
#include "cglo/allocation.hpp"
#include "cglo/objectives.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cglo {

// Zero-valued counts mean "derive from the problem" (see resolve()).
struct CGLOConfig {
  std::size_t n0 = 12;
  std::size_t regions = 0;
  int init_reps = 0;
  int r_min = 20;
  int b2 = 0;
  double kappa_coef = 0.1;
  double v = 1.0;
  std::optional<double> mean_lo;
  std::optional<double> mean_hi;
  std::size_t candidate_count = 0;
  std::size_t local_grid_size = 0;
  std::size_t refit_every = 5;
  std::size_t max_local_points = 0;  // 0: no cap
  std::size_t max_iterations = 0;    // 0: run until the budget is gone
  long long total_budget = 5000;
  std::uint64_t seed = 0;
  std::size_t fit_starts = 10;
  std::size_t refit_starts = 4;
  int cv_retries = 3;

  /// Copy with every derived default filled in for a d-dimensional problem.
  CGLOConfig resolve(std::size_t dim) const;
  /// Throws ConfigError naming the offending values.
  void validate(std::size_t dim) const;
};

struct TraceRow {
  std::size_t iter = 0;
  long long consumed = 0;
  /// 1-based region of the iteration; 0 for the initialization row and for
  /// optimizers without regions.
  std::size_t region = 0;
  std::size_t n_new = 0;
  long long b1 = 0;
  long long b2 = 0;
  Vector best_x;  // original coordinates
  double best_mean = 0.0;  // reported convention
  double wall_ms = 0.0;
};

struct IterationDetail {
  std::size_t n_total = 0;
  std::size_t n_region = 0;
  double gei_value = 0.0;
  /// min over points of reps, and the ceil(kappa) target after allocation.
  int min_reps = 0;
  int min_reps_target = 0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::vector<IterationDetail> details;  // parallel to rows
  std::vector<std::string> warnings;
};

struct RunResult {
  Vector best_x;
  double best_mean = 0.0;  // reported convention
  RunTrace trace;
  Dataset data;  // unit-cube coordinates
};

struct GlobalStepResult {
  Vector x_g0;
  RegionId region = 0;
  double gei_value = 0.0;
  std::size_t candidate_index = 0;
};

/// Everything the optimizer carries between steps. Coordinates are in the unit
/// cube of the objective's unit_view().
struct CGLOState {
  CGLOConfig cfg;
  StochasticObjective objective;
  Dataset data;
  InducingSet inducing;
  std::optional<AGLGPModel> model;
  AcquisitionContext ctx;
  BudgetState budget;
  std::size_t points_since_refit = 0;
  std::uint64_t grid_draws = 0;
  std::vector<std::string> warnings;

  const Partition& partition() const { return model->partition(); }
  bool exhausted() const { return budget.remaining() <= 0; }
};

CGLOState initialize(const StochasticObjective& objective, const CGLOConfig& cfg);

GlobalStepResult global_step(const AGLGPModel& model, const AcquisitionContext& ctx, const Dataset& data);

/// Adds points to region k until gEI(x_g0) <= G*, the effort cap or the budget
/// ends the loop. Returns the number of new points.
std::size_t local_step(CGLOState& state, RegionId k, const VectorRef& x_g0);

struct AllocationOutcome {
  long long b1 = 0;
  long long b2 = 0;
};
/// Minimum-replication top-up over all points, then OCBA within region k.
/// Throws InvalidStateError if the minimum-replication rule is violated while
/// budget remains.
AllocationOutcome allocation_step(CGLOState& state, RegionId k);

/// Region-constrained LHS discretization (rejection against the region's
/// bounding box, at most 50 rounds).
Matrix region_grid(const Partition& p, RegionId k, std::size_t count, std::uint64_t seed);

/// Candidate set covering every region with at least max(3, count / (2K)) points.
Matrix global_candidates(const Partition& p, std::size_t count, std::uint64_t seed);

RunResult run_cglo(const StochasticObjective& objective, const CGLOConfig& cfg);

/// Best point of the dataset as (original coordinates, reported mean).
std::pair<Vector, double> incumbent(const StochasticObjective& objective, const Dataset& data);

}  // namespace cglo
