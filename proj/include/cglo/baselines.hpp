#pragma once

#include "cglo/driver.hpp"

namespace cglo {

struct RandomSearchConfig {
  std::size_t points = 200;
  int reps_per_point = 25;
  std::uint64_t seed = 0;
  /// Replication budget; points beyond it are not drawn.
  long long total_budget = 5000;

  void validate() const;
};

/// Uniform points with a fixed number of replications each; one trace row per
/// evaluated point after the initialization row.
RunResult random_search(const StochasticObjective& objective, const RandomSearchConfig& cfg);

struct GpEiConfig {
  std::size_t n0 = 12;
  int init_reps = 0;  // 0: r_min
  int r_min = 20;
  int b2 = 0;  // 0: r_min
  std::size_t grid_size = 0;  // EI discretization, 0: 100 d
  std::size_t refit_every = 5;
  std::size_t fit_starts = 10;
  std::size_t refit_starts = 4;
  std::size_t max_iterations = 0;
  long long total_budget = 5000;
  std::uint64_t seed = 0;

  GpEiConfig resolve(std::size_t dim) const;
  void validate(std::size_t dim) const;
};

/// Full-GP EI search with OCBA allocation over all points: each iteration
/// evaluates the EI argmax of a fresh LHS grid with r_min replications, then
/// spends b2 replications by OCBA.
RunResult gp_ei_optimize(const StochasticObjective& objective, const GpEiConfig& cfg);

}  // namespace cglo
