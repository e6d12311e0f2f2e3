#include "cglo/acquisition.hpp"

#include "cglo/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cglo {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ei_closed(double best, double mean, double sd) {
  const double diff = best - mean;
  if (sd <= 0.0) return std::max(diff, 0.0);
  const double z = diff / sd;
  return std::max(0.0, diff * normal_cdf(z) + sd * normal_pdf(z));
}

std::size_t count_neighbors(const Dataset& data, const Partition& p, const VectorRef& x, double radius) {
  const RegionId k = p.nearest_center(x);
  const double r2 = radius * radius;
  std::size_t count = 0;
  for (const auto& pt : data.points) {
    if (pt.region == k && (pt.x - x).squaredNorm() < r2) ++count;
  }
  return count;
}

double density_penalty(std::size_t neighbors, double v) {
  return 1.0 / (1.0 + std::exp(static_cast<double>(neighbors) / v - 5.0));
}

double global_incumbent(const AGLGPModel& m, const AcquisitionContext& ctx) {
  const auto& ind = m.global().inducing.points;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ind.rows(); ++i) {
    best = std::min(best, ctx.clamp_mean(m.predict_global(ind.row(i).transpose()).mean));
  }
  return best;
}

double local_incumbent(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k) {
  const auto& local = m.local(k);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < local.x.rows(); ++i) {
    const Vector xi = local.x.row(i).transpose();
    const double mean = m.predict_global(xi).mean + m.predict_local(xi, k).mean;
    best = std::min(best, ctx.clamp_mean(mean));
  }
  return best;
}

double gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data,
           const VectorRef& x, double incumbent) {
  const auto pred = m.predict_global(x);
  const double ei = ei_closed(incumbent, ctx.clamp_mean(pred.mean), std::sqrt(pred.variance));
  return ei * density_penalty(count_neighbors(data, m.partition(), x, ctx.kappa_radius), ctx.v);
}

double gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data, const VectorRef& x) {
  return gei(m, ctx, data, x, global_incumbent(m, ctx));
}

double mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k, const VectorRef& x,
           double incumbent) {
  if (m.partition().nearest_center(x) != k) throw std::invalid_argument("mei: point outside region");
  const double mean = ctx.clamp_mean(m.predict_global(x).mean + m.predict_local(x, k).mean);
  const double sd = std::sqrt(m.local_spatial_variance(x, k));
  return ei_closed(incumbent, mean, sd);
}

double mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k, const VectorRef& x) {
  return mei(m, ctx, k, x, local_incumbent(m, ctx, k));
}

double switch_threshold(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data,
                        RegionId k) {
  const auto scores = kernels::score_gei(m, ctx, data);
  double best = -1.0;
  for (std::size_t i = 0; i < ctx.candidate_regions.size(); ++i) {
    if (ctx.candidate_regions[i] != k) best = std::max(best, scores[i]);
  }
  if (best < 0.0) throw InvalidStateError("switch_threshold: no candidate outside the active region");
  return best;
}

}  // namespace cglo
