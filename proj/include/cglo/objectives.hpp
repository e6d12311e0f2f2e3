#pragma once

#include "cglo/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace cglo {

struct TrueOptimum {
  Vector x;
  /// Value in the minimization convention.
  double value = 0.0;
};

struct EvalResult {
  double sample_mean = 0.0;
  /// Unbiased variance of one replication; 0 when count < 2.
  double sample_var = 0.0;
  int count = 0;
};

/// Noisy black box y(x) = f(x) + sd(x) * z with z ~ N(0, 1). Draw r at point x
/// comes from an engine seeded by (seed, hash(x), r), so results do not depend
/// on evaluation order or thread count.
class StochasticObjective {
 public:
  using Fn = std::function<double(const VectorRef&)>;

  StochasticObjective(std::string name, Box bounds, Fn mean_fn, Fn noise_sd_fn,
                      std::optional<TrueOptimum> true_opt, bool maximization = false);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return bounds_.dim(); }
  const Box& bounds() const { return bounds_; }
  const std::optional<TrueOptimum>& true_opt() const { return true_opt_; }
  /// True when the original problem maximizes -mean_fn; reports convert back.
  bool maximization() const { return maximization_; }
  double to_reported(double minimized_value) const { return maximization_ ? -minimized_value : minimized_value; }

  double mean(const VectorRef& x) const { return mean_fn_(x); }
  double noise_sd(const VectorRef& x) const { return noise_sd_fn_(x); }

  std::uint64_t seed() const { return seed_; }
  /// The same problem reparametrized onto the unit cube.
  StochasticObjective unit_view() const;
  StochasticObjective with_seed(std::uint64_t seed) const;

  /// Single draw with replication index `rep`.
  double draw(const VectorRef& x, long long rep) const;
  /// `reps` draws with indices first_rep .. first_rep + reps - 1.
  /// Throws std::invalid_argument when x is outside the bounds or reps < 1.
  EvalResult evaluate(const VectorRef& x, int reps, long long first_rep = 0) const;

 private:
  std::string name_;
  Box bounds_;
  Fn mean_fn_;
  Fn noise_sd_fn_;
  std::optional<TrueOptimum> true_opt_;
  bool maximization_ = false;
  std::uint64_t seed_ = 0;
};

/// cos(100(x - 0.2)) exp(2x) + 7 sin(10x) on [0, 1], noise variance 0.2 + 0.1 sin(10x).
StochasticObjective make_1d_paper(std::uint64_t seed = 0);

/// Two-peak-per-axis sine test function on [0, 100]^2 (maximized, so the
/// objective is -g) with noise variance 3 (1 + x1/100)^2 (1 + x2/100)^2.
StochasticObjective make_2d_sun(std::uint64_t seed = 0);
double sun_g(double x1, double x2);

/// "paper1d" or "sun2d"; throws std::invalid_argument otherwise.
StochasticObjective make_objective(const std::string& name, std::uint64_t seed = 0);

/// -ln(1/p - 1) for p in (0, 1).
double logistic_transform(double p);
double inverse_logistic_transform(double f);

}  // namespace cglo
