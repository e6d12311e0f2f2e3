#include "cglo/partition.hpp"

#include "cglo/sampling.hpp"

#include <algorithm>
#include <limits>

namespace cglo {

namespace {

std::size_t nearest(const Matrix& centers, const VectorRef& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d = (centers.row(c).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

Matrix farthest_point_seeds(const Matrix& points, std::size_t k, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Matrix centers(to_index(k), points.cols());
  centers.row(0) = points.row(pick(rng));
  Vector dist = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    Eigen::Index far = 0;
    dist.maxCoeff(&far);
    centers.row(to_index(c)) = points.row(far);
    dist = dist.cwiseMin((points.rowwise() - centers.row(to_index(c))).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, int max_iterations) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0) throw std::invalid_argument("kmeans: K must be positive");
  if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");

  KMeansResult res;
  res.centers = farthest_point_seeds(points, k, seed);
  res.assignment.assign(n, std::numeric_limits<std::size_t>::max());

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = nearest(res.centers, points.row(to_index(i)).transpose());
      if (c != res.assignment[i]) {
        res.assignment[i] = c;
        changed = true;
      }
    }
    res.iterations = iter + 1;

    // Repair empty clusters before recomputing centroids.
    std::vector<std::size_t> counts(k, 0);
    for (auto a : res.assignment) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      const auto largest = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (res.assignment[i] != largest) continue;
        const double d = (points.row(to_index(i)) - res.centers.row(to_index(largest))).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      res.assignment[far] = c;
      --counts[largest];
      counts[c] = 1;
      changed = true;
    }

    Matrix sums = Matrix::Zero(to_index(k), points.cols());
    for (std::size_t i = 0; i < n; ++i) sums.row(to_index(res.assignment[i])) += points.row(to_index(i));
    for (std::size_t c = 0; c < k; ++c) {
      res.centers.row(to_index(c)) = sums.row(to_index(c)) / static_cast<double>(counts[c]);
    }
    if (!changed) break;
  }
  return res;
}

Partition::Partition(std::vector<Region> regions, Box bounds)
    : regions_(std::move(regions)), bounds_(std::move(bounds)) {
  if (regions_.empty()) throw std::invalid_argument("Partition: need at least one region");
  const auto k = regions_.size();
  const auto d = bounds_.dim();

  // Probe the domain to bound each Voronoi cell; centers are always included.
  Rng rng(0x5eedb0c5ULL);
  const std::size_t probes = 2048 * d;
  const Matrix sample = latin_hypercube(probes, bounds_, rng);
  std::vector<Vector> lo(k, Vector::Constant(to_index(d), std::numeric_limits<double>::infinity()));
  std::vector<Vector> hi(k, Vector::Constant(to_index(d), -std::numeric_limits<double>::infinity()));
  auto include = [&](RegionId r, const Vector& x) {
    lo[r] = lo[r].cwiseMin(x);
    hi[r] = hi[r].cwiseMax(x);
  };
  for (RegionId r = 0; r < k; ++r) include(r, regions_[r].center);
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    const Vector x = sample.row(i).transpose();
    include(nearest_center(x), x);
  }
  const Vector margin = 0.05 * bounds_.width();
  boxes_.reserve(k);
  for (RegionId r = 0; r < k; ++r) {
    boxes_.push_back(Box{(lo[r] - margin).cwiseMax(bounds_.lower),
                         (hi[r] + margin).cwiseMin(bounds_.upper)});
  }
}

Matrix Partition::centers() const {
  Matrix c(to_index(regions_.size()), to_index(bounds_.dim()));
  for (std::size_t r = 0; r < regions_.size(); ++r) c.row(to_index(r)) = regions_[r].center.transpose();
  return c;
}

RegionId Partition::nearest_center(const VectorRef& x) const {
  RegionId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& r : regions_) {
    const double d = (r.center - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = r.id;
    }
  }
  return best;
}

RegionId Partition::assign(const VectorRef& x) const {
  if (!bounds_.contains(x)) throw std::invalid_argument("assign_region: point outside domain");
  return nearest_center(x);
}

Partition build_partition(const Matrix& points, std::size_t k, std::uint64_t seed, const Box& bounds) {
  const auto km = kmeans(points, k, seed);
  std::vector<Region> regions(k);
  for (std::size_t r = 0; r < k; ++r) {
    regions[r].id = r;
    regions[r].center = km.centers.row(to_index(r)).transpose();
  }
  Partition provisional(regions, bounds);
  // Members follow the final nearest-center rule, which can differ from the last
  // Lloyd assignment only on exact ties.
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    regions[provisional.nearest_center(points.row(i).transpose())].member_ids.push_back(
        static_cast<std::size_t>(i));
  }
  return Partition(std::move(regions), bounds);
}

RegionId assign_region(const Partition& p, const VectorRef& x) { return p.assign(x); }

std::size_t default_region_count(std::size_t n0, std::size_t dim) {
  const std::size_t k = dim == 0 ? 0 : n0 / (4 * dim);
  return std::clamp<std::size_t>(k, 2, 10);
}

}  // namespace cglo
