#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cglo/gp_core.hpp"
#include "cglo/sampling.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace cglo;

namespace {

GPData noisy_sample(std::uint64_t seed, std::size_t n, std::size_t d) {
  Rng rng(seed);
  GPData g;
  g.x = latin_hypercube(n, Box::unit(d), rng);
  g.y = Vector(to_index(n));
  g.noise_var = Vector(to_index(n));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < g.x.rows(); ++i) {
    g.y[i] = std::cos(4.0 * g.x.row(i).sum()) + 0.2 * u(rng);
    g.noise_var[i] = 0.01 + 0.05 * u(rng);
  }
  return g;
}

GPHyperparams hp_of(std::size_t d, double mean, double var, double ls) {
  GPHyperparams h;
  h.mean = mean;
  h.variance = var;
  h.lengthscales = Vector::Constant(to_index(d), ls);
  return h;
}

}  // namespace

TEST_CASE("gaussian correlation") {
  Vector a(2), b(2), ls(2);
  a << 0.1, 0.2;
  b << 0.4, 0.0;
  ls << 2.0, 3.0;
  CHECK(gauss_corr(a, b, ls) == doctest::Approx(std::exp(-(2.0 * 0.09 + 3.0 * 0.04))));
  CHECK(gauss_corr(a, a, ls) == 1.0);
  CHECK_THROWS_AS(gauss_corr(a, Vector::Zero(3), ls), std::invalid_argument);
}

TEST_CASE("full GP matches explicit inverse") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto g = noisy_sample(s, 8, 2);
    const auto h = hp_of(2, 0.3, 1.2, 3.0);
    FullGP gp(g, h);
    std::mt19937_64 rng(s);
    for (int t = 0; t < 5; ++t) {
      const Vector x0 = oracle::random_point(rng, 2);
      const auto p = gp.predict(x0);
      const auto [m, v] = oracle::full_gp(g.x, g.y, g.noise_var, h, x0);
      CHECK(oracle::rel_err(p.mean, m) < 1e-9);
      CHECK(oracle::rel_err(p.variance, v) < 1e-9);
    }
  }
}

TEST_CASE("noise-free GP interpolates") {
  auto g = noisy_sample(4, 6, 1);
  g.noise_var = Vector();
  const auto h = hp_of(1, 0.0, 1.0, 5.0);
  FullGP gp(g, h);
  for (Eigen::Index i = 0; i < g.x.rows(); ++i) {
    const auto p = gp.predict(g.x.row(i).transpose());
    CHECK(p.mean == doctest::Approx(g.y[i]).epsilon(1e-6));
    CHECK(std::abs(p.variance) < 1e-6);
  }
}

TEST_CASE("jitter ladder kicks in for duplicated points") {
  Matrix x(3, 1);
  x << 0.2, 0.2, 0.7;
  const auto c = build_cov(x, hp_of(1, 0.0, 1.0, 1.0));
  CHECK(c.jitter_used > 0.0);
  CHECK(c.jitter_used <= CholeskyFactor::kMaxJitter);
  const auto f = CholeskyFactor::factorize(Matrix::Identity(4, 4), 1.0);
  CHECK(f.jitter() == 0.0);
  CHECK(f.log_det() == doctest::Approx(0.0));
}

TEST_CASE("FITC solve and log determinant against dense algebra") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto g = noisy_sample(100 + s, 9, 2);
    const auto h = hp_of(2, 0.0, 0.8, 2.0);
    Matrix xg(3, 2);
    xg << 0.2, 0.2, 0.8, 0.3, 0.5, 0.8;
    FitcSystem sys(g.x, xg, g.noise_var, h);
    const Matrix gm = oracle::kmat(xg, xg, h.variance, h.lengthscales);
    const Matrix gmn = oracle::kmat(xg, g.x, h.variance, h.lengthscales);
    Matrix c = gmn.transpose() * gm.inverse() * gmn;
    for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, i) = h.variance + g.noise_var[i];
    CHECK(sys.log_det() == doctest::Approx(std::log(c.determinant())).epsilon(1e-9));
    const Vector want = c.inverse() * g.y;
    const Vector got = sys.solve(g.y);
    CHECK((got - want).norm() / want.norm() < 1e-9);
  }
}

TEST_CASE("negative log likelihood and GLS mean") {
  const auto g = noisy_sample(7, 8, 2);
  auto h = hp_of(2, 0.4, 1.1, 4.0);
  Matrix c = oracle::kmat(g.x, g.x, h.variance, h.lengthscales);
  c.diagonal() += g.noise_var;
  const Matrix ci = c.inverse();
  const Vector r = (g.y.array() - h.mean).matrix();
  const double want = 0.5 * (r.dot(ci * r) + std::log(c.determinant()) + 8.0 * std::log(2.0 * M_PI));
  CHECK(neg_log_likelihood(g, h, FullStructure{}) == doctest::Approx(want).epsilon(1e-10));
  const Vector one = Vector::Ones(8);
  const double gls = one.dot(ci * g.y) / one.dot(ci * one);
  CHECK(gls_mean(g, h, FullStructure{}) == doctest::Approx(gls).epsilon(1e-10));
}

TEST_CASE("hyperparameter fit improves on its starting point and respects the floor") {
  const auto g = noisy_sample(9, 12, 1);
  const auto bounds = default_bounds(g, std::nullopt);
  FitOptions opt;
  opt.starts = 4;
  opt.seed = 2;
  const auto fit = fit_hyperparams(g, FullStructure{}, bounds, Vector::Constant(1, 20.0), opt);
  CHECK(fit.hp.lengthscales[0] >= 20.0);
  CHECK(fit.hp.variance >= bounds.variance_lo);
  CHECK(fit.hp.variance <= bounds.variance_hi);
  CHECK(fit.nll == doctest::Approx(neg_log_likelihood(g, fit.hp, FullStructure{})).epsilon(1e-12));
  GPHyperparams warm = hp_of(1, 0.0, 0.5, 40.0);
  warm.mean = gls_mean(g, warm, FullStructure{});
  opt.warm_start = warm;
  const auto warmed = fit_hyperparams(g, FullStructure{}, bounds, Vector::Constant(1, 20.0), opt);
  CHECK(warmed.nll <= neg_log_likelihood(g, warm, FullStructure{}) + 1e-12);
  opt.warm_start.reset();
  const auto again = fit_hyperparams(g, FullStructure{}, bounds, Vector::Constant(1, 20.0), opt);
  CHECK(again.nll == fit.nll);
}
