#pragma once

#include "cglo/partition.hpp"
#include "cglo/types.hpp"

#include <vector>

namespace cglo {

struct DesignPoint {
  Vector x;
  int reps = 0;
  double sample_mean = 0.0;
  /// Variance of a single replication; meaningful only when reps >= 2.
  double sample_var = 0.0;
  RegionId region = 0;

  /// Streaming (count, mean, M2) merge of a batch of `count` draws with the given
  /// batch mean and batch sample variance.
  void merge(int count, double batch_mean, double batch_var);
};

struct Dataset {
  std::size_t dim = 0;
  Box bounds;
  std::vector<DesignPoint> points;

  std::size_t size() const { return points.size(); }
  Matrix x() const;
  Vector y() const;

  /// Median of sample_var over points with reps >= 2; zero when none exist.
  double prior_noise_var() const;
  /// Variance of each sample mean: sample_var / reps, with the prior used for
  /// single-replication points.
  Vector mean_noise_var() const;

  std::vector<std::size_t> members(RegionId k) const;
  /// Index of the point with the lowest sample mean (lowest index on ties).
  std::size_t best_index() const;
  long long total_reps() const;
};

}  // namespace cglo
