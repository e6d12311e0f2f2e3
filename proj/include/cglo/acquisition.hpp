#pragma once

#include "cglo/aglgp_model.hpp"
#include "cglo/dataset.hpp"

#include <vector>

namespace cglo {

struct AcquisitionContext {
  /// Penalty steepness v.
  double v = 1.0;
  /// Neighborhood radius; tracks the inducing set's minimum pairwise distance.
  double kappa_radius = 0.1;
  /// Clamp applied to predictive means before computing improvements.
  double mean_lo = -1e300;
  double mean_hi = 1e300;
  /// Global candidate set, one point per row, and the region of each row.
  Matrix candidates;
  std::vector<RegionId> candidate_regions;

  double clamp_mean(double m) const { return std::min(std::max(m, mean_lo), mean_hi); }
};

double normal_pdf(double z);
double normal_cdf(double z);

/// E max(best - Y, 0) for Y ~ N(mean, sd^2).
double ei_closed(double best, double mean, double sd);

/// Design points of x's own region strictly closer than `radius`.
std::size_t count_neighbors(const Dataset& data, const Partition& p, const VectorRef& x, double radius);

/// 1 / (1 + exp(n_a / v - 5)).
double density_penalty(std::size_t neighbors, double v);

/// Lowest clamped global prediction over the inducing points.
double global_incumbent(const AGLGPModel& m, const AcquisitionContext& ctx);
/// Lowest clamped overall prediction over the design points of region k.
/// Returns +infinity when the region has no design points.
double local_incumbent(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k);

/// Global EI with density penalty. `incumbent` is global_incumbent(m, ctx).
double gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data,
           const VectorRef& x, double incumbent);
double gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data, const VectorRef& x);

/// Local EI on the overall model with noise-free spatial variance.
/// Throws std::invalid_argument when x is not in region k.
double mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k, const VectorRef& x,
           double incumbent);
double mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k, const VectorRef& x);

/// Largest gEI over candidates outside region k (the switching threshold G*).
/// Throws InvalidStateError when every candidate lies in region k.
double switch_threshold(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data,
                        RegionId k);

}  // namespace cglo
