#pragma once

#include "cglo/dataset.hpp"
#include "cglo/partition.hpp"

#include <cstdint>
#include <vector>

namespace cglo {

struct InducingSet {
  Matrix points;  // m x d
  std::vector<RegionId> source_region;
  std::vector<std::size_t> per_region_counts;
  /// Neighborhood radius used by the global criterion: the smallest positive
  /// pairwise distance, or diagonal/10 when no such pair exists (m = 1).
  double min_pairwise_distance = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
};

struct InducingOptions {
  /// 0 selects the default max(1, ceil(N_k / 4)) capped at 2d + 2.
  std::size_t target_per_region = 0;
  std::size_t bands = 2;
  std::uint64_t seed = 0;
};

std::size_t default_inducing_target(std::size_t region_size, std::size_t dim);

/// Per region: sort members by sample mean, split into quantile bands, then
/// k-means each band in x; band centroids become the inducing points.
/// Throws InvalidStateError when a region has no design points.
InducingSet select_inducing(const Dataset& data, const Partition& p, const InducingOptions& options);

/// Inducing points of one region (the building block of select_inducing).
Matrix select_region_inducing(const Dataset& data, RegionId k, const InducingOptions& options);

double min_positive_pairwise_distance(const Matrix& points, double fallback);

}  // namespace cglo
