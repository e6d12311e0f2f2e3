#pragma once

#include "cglo/dataset.hpp"
#include "cglo/objectives.hpp"

#include <vector>

namespace cglo {

struct BudgetState {
  long long total = 0;
  long long consumed = 0;
  int r_min = 1;
  /// Replications distributed by OCBA per allocation step.
  int b2 = 1;
  /// kappa_k = kappa_coef * k; summable tail for any kappa_coef > 0.
  double kappa_coef = 0.1;

  long long remaining() const { return total > consumed ? total - consumed : 0; }
  /// ceil(kappa_coef * n_points): the minimum replication count per point.
  int min_reps(std::size_t n_points) const;
};

/// Extra replications bringing every design point to at least min_reps(N).
/// When the total exceeds the remaining budget the plan is scaled down
/// proportionally (largest remainder) to fit exactly.
std::vector<int> min_rep_topup(const Dataset& data, const BudgetState& bs);

struct OcbaEntry {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t id = 0;
};

inline constexpr double kOcbaFloor = 1e-6;

/// Continuous OCBA shares (summing to 1) in input order: N_i proportional to
/// (sd_i / Delta_bi)^2 for non-best points and
/// N_b = sd_b * sqrt(sum_{i != b} (N_i / sd_i)^2). Differences and standard
/// deviations are floored at kOcbaFloor.
std::vector<double> ocba_shares(const std::vector<OcbaEntry>& entries);

/// Integer OCBA plan in input order summing exactly to b2 (largest remainder,
/// lowest index on ties). Throws std::invalid_argument when b2 <= 0 or
/// entries is empty.
std::vector<int> ocba_allocate(const std::vector<OcbaEntry>& entries, int b2);

/// Runs the planned replications and merges them into the dataset. Returns the
/// number of replications consumed.
long long apply_plan(const StochasticObjective& objective, Dataset& data, const std::vector<int>& plan);

/// Rounds nonnegative shares of `total` to integers summing to `total`
/// (largest remainder, lowest index on ties).
std::vector<int> largest_remainder(const std::vector<double>& shares, long long total);

}  // namespace cglo
