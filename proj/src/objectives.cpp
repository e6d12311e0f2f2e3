#include "cglo/objectives.hpp"

#include "cglo/sampling.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace cglo {

StochasticObjective::StochasticObjective(std::string name, Box bounds, Fn mean_fn, Fn noise_sd_fn,
                                         std::optional<TrueOptimum> true_opt, bool maximization)
    : name_(std::move(name)),
      bounds_(std::move(bounds)),
      mean_fn_(std::move(mean_fn)),
      noise_sd_fn_(std::move(noise_sd_fn)),
      true_opt_(std::move(true_opt)),
      maximization_(maximization) {}

StochasticObjective StochasticObjective::with_seed(std::uint64_t seed) const {
  auto copy = *this;
  copy.seed_ = seed;
  return copy;
}

StochasticObjective StochasticObjective::unit_view() const {
  const Box box = bounds_;
  auto mean = [box, f = mean_fn_](const VectorRef& u) { return f(box.from_unit(u)); };
  auto sd = [box, f = noise_sd_fn_](const VectorRef& u) { return f(box.from_unit(u)); };
  std::optional<TrueOptimum> opt;
  if (true_opt_) opt = TrueOptimum{box.to_unit(true_opt_->x), true_opt_->value};
  StochasticObjective out(name_, Box::unit(dim()), mean, sd, opt, maximization_);
  out.seed_ = seed_;
  return out;
}

double StochasticObjective::draw(const VectorRef& x, long long rep) const {
  std::uint64_t key = seed_;
  for (Eigen::Index i = 0; i < x.size(); ++i) key = mix_seed(key, std::bit_cast<std::uint64_t>(x[i]));
  key = mix_seed(key, static_cast<std::uint64_t>(rep));
  Rng rng(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  return mean_fn_(x) + noise_sd_fn_(x) * normal(rng);
}

EvalResult StochasticObjective::evaluate(const VectorRef& x, int reps, long long first_rep) const {
  if (!bounds_.contains(x)) throw std::invalid_argument("evaluate: point outside bounds");
  if (reps < 1) throw std::invalid_argument("evaluate: reps must be positive");
  EvalResult r;
  double m2 = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double y = draw(x, first_rep + i);
    ++r.count;
    const double delta = y - r.sample_mean;
    r.sample_mean += delta / r.count;
    m2 += delta * (y - r.sample_mean);
  }
  r.sample_var = r.count >= 2 ? m2 / (r.count - 1) : 0.0;
  return r;
}

StochasticObjective make_1d_paper(std::uint64_t seed) {
  auto mean = [](const VectorRef& x) {
    return std::cos(100.0 * (x[0] - 0.2)) * std::exp(2.0 * x[0]) + 7.0 * std::sin(10.0 * x[0]);
  };
  auto sd = [](const VectorRef& x) { return std::sqrt(0.2 + 0.1 * std::sin(10.0 * x[0])); };
  TrueOptimum opt{Vector::Constant(1, 0.9865), -10.1316};
  return StochasticObjective("paper1d", Box::unit(1), mean, sd, opt).with_seed(seed);
}

double sun_g(double x1, double x2) {
  auto term = [](double x) {
    const double s = std::sin(0.05 * std::numbers::pi * x);
    const double s6 = s * s * s * s * s * s;
    const double e = (x - 90.0) / 50.0;
    return 10.0 * s6 / std::pow(2.0, e * e);
  };
  return term(x1) + term(x2);
}

StochasticObjective make_2d_sun(std::uint64_t seed) {
  auto mean = [](const VectorRef& x) { return -sun_g(x[0], x[1]); };
  auto sd = [](const VectorRef& x) {
    const double a = 1.0 + x[0] / 100.0;
    const double b = 1.0 + x[1] / 100.0;
    return std::sqrt(3.0 * a * a * b * b);
  };
  Box bounds{Vector::Zero(2), Vector::Constant(2, 100.0)};
  TrueOptimum opt{Vector::Constant(2, 90.0), -20.0};
  return StochasticObjective("sun2d", bounds, mean, sd, opt, true).with_seed(seed);
}

StochasticObjective make_objective(const std::string& name, std::uint64_t seed) {
  if (name == "paper1d") return make_1d_paper(seed);
  if (name == "sun2d") return make_2d_sun(seed);
  throw std::invalid_argument("unknown objective '" + name + "' (expected paper1d or sun2d)");
}

double logistic_transform(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logistic_transform: p must lie in (0, 1)");
  return -std::log(1.0 / p - 1.0);
}

double inverse_logistic_transform(double f) { return 1.0 / (1.0 + std::exp(-f)); }

}  // namespace cglo
