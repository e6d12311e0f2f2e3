#pragma once

#include "cglo/types.hpp"

#include <cstdint>
#include <vector>

namespace cglo {

/// Region ids are 0-based indices into Partition::regions().
using RegionId = std::size_t;

struct KMeansResult {
  Matrix centers;                      // K x d
  std::vector<std::size_t> assignment;  // per input point, 0-based cluster
  int iterations = 0;
};

/// Lloyd's algorithm with farthest-point seeding. Stops when the assignment no
/// longer changes or after `max_iterations`. Empty clusters take the point
/// farthest from its center in the largest cluster. Deterministic given seed.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    int max_iterations = 100);

struct Region {
  RegionId id = 0;
  Vector center;
  std::vector<std::size_t> member_ids;
};

/// Voronoi partition of a box by fixed cluster centers. Membership is the
/// nearest center in Euclidean distance, ties going to the lowest id, which
/// realizes every pairwise bisecting hyperplane.
class Partition {
 public:
  Partition(std::vector<Region> regions, Box bounds);

  std::size_t size() const { return regions_.size(); }
  const std::vector<Region>& regions() const { return regions_; }
  const Region& region(RegionId k) const { return regions_.at(k); }
  const Box& bounds() const { return bounds_; }
  Matrix centers() const;

  /// Throws std::invalid_argument when x is outside the domain.
  RegionId assign(const VectorRef& x) const;
  /// Same rule without the domain check.
  RegionId nearest_center(const VectorRef& x) const;

  /// Bounding box enclosing region k (estimated from a dense probe of the
  /// domain plus a margin, clipped to the domain).
  const Box& bounding_box(RegionId k) const { return boxes_.at(k); }

 private:
  std::vector<Region> regions_;
  Box bounds_;
  std::vector<Box> boxes_;
};

Partition build_partition(const Matrix& points, std::size_t k, std::uint64_t seed, const Box& bounds);

RegionId assign_region(const Partition& p, const VectorRef& x);

/// floor(n0 / (4 d)) clamped to [2, 10].
std::size_t default_region_count(std::size_t n0, std::size_t dim);

}  // namespace cglo
