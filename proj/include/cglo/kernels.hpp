#pragma once

// Batch scoring kernels. Each kernel has a serial reference implementation and
// an OpenMP implementation; both return identical vectors (every entry is
// computed independently). Argmax selection happens serially afterwards with
// lowest-index tie breaking, so results do not depend on the thread count.

#include "cglo/acquisition.hpp"

#include <vector>

namespace cglo::kernels {

namespace serial {
std::vector<double> score_gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data);
std::vector<double> score_mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k,
                              const Matrix& grid);
std::vector<Prediction> predict_overall(const AGLGPModel& m, const Matrix& points);
}  // namespace serial

namespace parallel {
std::vector<double> score_gei(const AGLGPModel& m, const AcquisitionContext& ctx, const Dataset& data);
std::vector<double> score_mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k,
                              const Matrix& grid);
std::vector<Prediction> predict_overall(const AGLGPModel& m, const Matrix& points);
}  // namespace parallel

inline std::vector<double> score_gei(const AGLGPModel& m, const AcquisitionContext& ctx,
                                     const Dataset& data) {
  return parallel::score_gei(m, ctx, data);
}
inline std::vector<double> score_mei(const AGLGPModel& m, const AcquisitionContext& ctx, RegionId k,
                                     const Matrix& grid) {
  return parallel::score_mei(m, ctx, k, grid);
}

/// First index of the maximum (lowest index on ties).
std::size_t argmax(const std::vector<double>& values);

/// Number of OpenMP threads kernels will use (1 when built without OpenMP).
int max_threads();

}  // namespace cglo::kernels
