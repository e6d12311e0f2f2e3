#include "simplex.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>
#include <mutex>

namespace cglo::detail {

namespace {

// GSL rejects non-finite values; failed factorizations are reported as this.
constexpr double kPenalty = 1e300;

struct Call {
  const std::function<double(const Vector&)>* f;
  const Vector* lo;
  const Vector* hi;
  SimplexResult* res;
};

double trampoline(const gsl_vector* z, void* params) {
  auto& c = *static_cast<Call*>(params);
  Vector x(c.lo->size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = gsl_vector_get(z, static_cast<std::size_t>(i));
  x = x.cwiseMax(*c.lo).cwiseMin(*c.hi);
  ++c.res->evaluations;
  double y = (*c.f)(x);
  if (!std::isfinite(y)) y = kPenalty;
  if (y < c.res->value) {
    c.res->value = y;
    c.res->x = x;
  }
  return y;
}

}  // namespace

SimplexResult minimize_in_box(const std::function<double(const Vector&)>& f, const Vector& x0,
                              const Vector& lo, const Vector& hi, int max_evals, double size_tol) {
  static std::once_flag quiet;
  std::call_once(quiet, [] { gsl_set_error_handler_off(); });

  const auto n = static_cast<std::size_t>(x0.size());
  SimplexResult res;
  res.x = x0.cwiseMax(lo).cwiseMin(hi);
  Call call{&f, &lo, &hi, &res};
  gsl_multimin_function fn{&trampoline, n, &call};

  using VecPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
  VecPtr start(gsl_vector_alloc(n), &gsl_vector_free);
  VecPtr step(gsl_vector_alloc(n), &gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    gsl_vector_set(start.get(), i, res.x[k]);
    // step toward the interior of the box
    const double s = 0.1 * (hi[k] - lo[k]);
    gsl_vector_set(step.get(), i, res.x[k] + s <= hi[k] ? s : -s);
  }

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
  if (gsl_multimin_fminimizer_set(m.get(), &fn, start.get(), step.get()) != GSL_SUCCESS) return res;
  while (res.evaluations < max_evals) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), size_tol) == GSL_SUCCESS) break;
  }
  if (res.value >= kPenalty) res.value = std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace cglo::detail
