#include "cglo/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cglo::kernels {

namespace serial {

std::vector<double> score_gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data) {
  const double incumbent = global_incumbent(m, ctx);
  std::vector<double> out(static_cast<std::size_t>(ctx.candidates.rows()));
  for (Eigen::Index i = 0; i < ctx.candidates.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = gei(m, ctx, data, ctx.candidates.row(i).transpose(), incumbent);
  }
  return out;
}

std::vector<double> score_mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k,
                              const Matrix& grid) {
  const double incumbent = local_incumbent(m, ctx, k);
  std::vector<double> out(static_cast<std::size_t>(grid.rows()));
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = mei(m, ctx, k, grid.row(i).transpose(), incumbent);
  }
  return out;
}

std::vector<Prediction> predict_overall(const AGLGPModel& m, const Matrix& points) {
  std::vector<Prediction> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = m.predict_overall(points.row(i).transpose());
  }
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<double> score_gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data) {
  const double incumbent = global_incumbent(m, ctx);
  const Eigen::Index n = ctx.candidates.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = gei(m, ctx, data, ctx.candidates.row(i).transpose(), incumbent);
  }
  return out;
}

std::vector<double> score_mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k,
                              const Matrix& grid) {
  const double incumbent = local_incumbent(m, ctx, k);
  const Eigen::Index n = grid.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
  // Exceptions must not escape the parallel region.
  bool outside = false;
#pragma omp parallel for schedule(static) reduction(|| : outside)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = grid.row(i).transpose();
    if (m.partition().nearest_center(x) != k) {
      outside = true;
      continue;
    }
    out[static_cast<std::size_t>(i)] = mei(m, ctx, k, x, incumbent);
  }
  if (outside) throw std::invalid_argument("mei: point outside region");
  return out;
}

std::vector<Prediction> predict_overall(const AGLGPModel& m, const Matrix& points) {
  const Eigen::Index n = points.rows();
  std::vector<Prediction> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = m.predict_overall(points.row(i).transpose());
  }
  return out;
}

}  // namespace parallel

std::size_t argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace cglo::kernels
