#include "cglo/inducing.hpp"

#include "cglo/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cglo {

std::size_t default_inducing_target(std::size_t region_size, std::size_t dim) {
  const std::size_t quarter = (region_size + 3) / 4;
  return std::min(std::max<std::size_t>(1, quarter), 2 * dim + 2);
}

namespace {

// Largest-remainder split of `total` over bands proportional to their sizes,
// with every band getting at least one and at most its size.
std::vector<std::size_t> split_counts(const std::vector<std::size_t>& sizes, std::size_t total) {
  const std::size_t nb = sizes.size();
  const double n = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  std::vector<std::size_t> out(nb, 1);
  std::size_t assigned = nb;
  std::vector<double> remainder(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const double share = static_cast<double>(total) * static_cast<double>(sizes[b]) / n;
    const auto base = std::min(sizes[b], std::max<std::size_t>(1, static_cast<std::size_t>(share)));
    assigned += base - 1;
    out[b] = base;
    remainder[b] = share - static_cast<double>(base);
  }
  while (assigned < total) {
    std::size_t pick = nb;
    for (std::size_t b = 0; b < nb; ++b) {
      if (out[b] >= sizes[b]) continue;
      if (pick == nb || remainder[b] > remainder[pick]) pick = b;
    }
    if (pick == nb) break;
    ++out[pick];
    remainder[pick] -= 1.0;
    ++assigned;
  }
  while (assigned > total) {
    std::size_t pick = nb;
    for (std::size_t b = 0; b < nb; ++b) {
      if (out[b] <= 1) continue;
      if (pick == nb || remainder[b] < remainder[pick]) pick = b;
    }
    if (pick == nb) break;
    --out[pick];
    remainder[pick] += 1.0;
    --assigned;
  }
  return out;
}

}  // namespace

Matrix select_region_inducing(const Dataset& data, RegionId k, const InducingOptions& options) {
  auto members = data.members(k);
  if (members.empty()) {
    throw InvalidStateError("select_inducing: region " + std::to_string(k) + " has no design points");
  }
  const std::size_t n = members.size();
  const std::size_t target =
      options.target_per_region > 0 ? options.target_per_region : default_inducing_target(n, data.dim);
  const std::size_t count = std::min(target, n);

  std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
    return data.points[a].sample_mean < data.points[b].sample_mean;
  });
  const bool flat = data.points[members.front()].sample_mean == data.points[members.back()].sample_mean;
  const std::size_t nbands = flat ? 1 : std::max<std::size_t>(1, std::min({options.bands, count, n}));

  std::vector<std::vector<std::size_t>> bands(nbands);
  for (std::size_t b = 0; b < nbands; ++b) {
    bands[b].assign(members.begin() + static_cast<std::ptrdiff_t>(b * n / nbands),
                    members.begin() + static_cast<std::ptrdiff_t>((b + 1) * n / nbands));
  }
  std::vector<std::size_t> sizes;
  for (const auto& band : bands) sizes.push_back(band.size());
  const auto per_band = split_counts(sizes, count);

  Matrix out(to_index(count), to_index(data.dim));
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < nbands; ++b) {
    Matrix xb(to_index(bands[b].size()), to_index(data.dim));
    for (std::size_t i = 0; i < bands[b].size(); ++i) {
      xb.row(to_index(i)) = data.points[bands[b][i]].x.transpose();
    }
    const auto km = kmeans(xb, per_band[b], mix_seed(options.seed, mix_seed(k, b)));
    out.middleRows(row, km.centers.rows()) = km.centers;
    row += km.centers.rows();
  }
  return out.topRows(row);
}

double min_positive_pairwise_distance(const Matrix& points, double fallback) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      if (d > 0.0 && d < best) best = d;
    }
  }
  return std::isfinite(best) ? best : fallback;
}

InducingSet select_inducing(const Dataset& data, const Partition& p, const InducingOptions& options) {
  std::vector<Matrix> blocks;
  InducingSet set;
  Eigen::Index m = 0;
  for (RegionId k = 0; k < p.size(); ++k) {
    blocks.push_back(select_region_inducing(data, k, options));
    set.per_region_counts.push_back(static_cast<std::size_t>(blocks.back().rows()));
    m += blocks.back().rows();
  }
  set.points.resize(m, to_index(data.dim));
  Eigen::Index row = 0;
  for (RegionId k = 0; k < blocks.size(); ++k) {
    set.points.middleRows(row, blocks[k].rows()) = blocks[k];
    row += blocks[k].rows();
    set.source_region.insert(set.source_region.end(), set.per_region_counts[k], k);
  }
  set.min_pairwise_distance = min_positive_pairwise_distance(set.points, p.bounds().diagonal() / 10.0);
  return set;
}

}  // namespace cglo
