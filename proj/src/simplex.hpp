#pragma once

#include "cglo/types.hpp"

#include <functional>
#include <limits>

namespace cglo::detail {

struct SimplexResult {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// GSL nmsimplex2 on the box [lo, hi]. Trial points are projected onto the box
/// before evaluation; the best projected point seen is returned, so the value is
/// never worse than f(x0).
SimplexResult minimize_in_box(const std::function<double(const Vector&)>& f, const Vector& x0,
                              const Vector& lo, const Vector& hi, int max_evals, double size_tol = 1e-6);

}  // namespace cglo::detail
