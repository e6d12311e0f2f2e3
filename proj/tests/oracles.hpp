#pragma once

// Independent reference computations for the tests. Everything here is built
// from explicit dense matrices and inverses (or brute force / sampling), with
// no call into the library's factorizations or predictors.

#include "cglo/aglgp_model.hpp"
#include "cglo/allocation.hpp"
#include "cglo/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using cglo::Matrix;
using cglo::Vector;

inline double kern(const Vector& a, const Vector& b, double variance, const Vector& theta) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += theta[k] * (a[k] - b[k]) * (a[k] - b[k]);
  return variance * std::exp(-s);
}

inline Matrix kmat(const Matrix& a, const Matrix& b, double variance, const Vector& theta) {
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      out(i, j) = kern(a.row(i).transpose(), b.row(j).transpose(), variance, theta);
  return out;
}

inline std::size_t nearest(const Matrix& centers, const Vector& x) {
  std::size_t best = 0;
  double bd = (centers.row(0).transpose() - x).squaredNorm();
  for (Eigen::Index k = 1; k < centers.rows(); ++k) {
    const double d = (centers.row(k).transpose() - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

// Inputs of the dense two-stage predictors, copied out of a dataset.
struct Problem {
  Matrix x;                 // n x d
  Vector y;                 // sample means
  Vector noise;             // variance of each sample mean
  std::vector<std::size_t> region;  // per design point
  Matrix centers;           // K x d
  Matrix xg;                // m x d inducing
  cglo::GPHyperparams global;
  std::vector<cglo::GPHyperparams> local;
};

struct Dense {
  Problem p;
  Matrix gm_inv, lam_sig_inv, q_inv;
  Vector resid_global;  // Y - yhat_g(X)

  explicit Dense(Problem prob) : p(std::move(prob)) {
    const auto& h = p.global;
    const Matrix gm = kmat(p.xg, p.xg, h.variance, h.lengthscales);
    const Matrix gmn = kmat(p.xg, p.x, h.variance, h.lengthscales);
    gm_inv = gm.inverse();
    const Eigen::Index n = p.x.rows();
    Vector lam(n);
    const Matrix qnn = gmn.transpose() * gm_inv * gmn;
    for (Eigen::Index i = 0; i < n; ++i) lam[i] = h.variance - qnn(i, i);
    Matrix ls = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) ls(i, i) = 1.0 / (lam[i] + p.noise[i]);
    lam_sig_inv = ls;
    q_inv = (gm + gmn * ls * gmn.transpose()).inverse();
    resid_global = Vector(n);
    for (Eigen::Index i = 0; i < n; ++i) resid_global[i] = p.y[i] - global_mean(p.x.row(i).transpose());
  }

  Vector centered() const { return (p.y.array() - p.global.mean).matrix(); }

  // mu + g' Q^{-1} G_mn (Lambda + S)^{-1} (Y - mu)
  double global_mean(const Vector& x0) const {
    const auto& h = p.global;
    const Vector g = kmat(p.xg, x0.transpose(), h.variance, h.lengthscales).col(0);
    const Matrix gmn = kmat(p.xg, p.x, h.variance, h.lengthscales);
    return h.mean + g.dot(q_inv * gmn * lam_sig_inv * centered());
  }

  // sigma^2 - g' G_m^{-1} g + g' Q^{-1} g
  double global_var(const Vector& x0) const {
    const auto& h = p.global;
    const Vector g = kmat(p.xg, x0.transpose(), h.variance, h.lengthscales).col(0);
    return h.variance - g.dot(gm_inv * g) + g.dot(q_inv * g);
  }

  // Block-diagonal L over all n points (zero across regions).
  Matrix big_l() const {
    const Eigen::Index n = p.x.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (p.region[i] == p.region[j]) {
          const auto& h = p.local[p.region[i]];
          l(i, j) = kern(p.x.row(i).transpose(), p.x.row(j).transpose(), h.variance, h.lengthscales);
        }
    return l;
  }

  Vector small_l(const Vector& x0, std::size_t k) const {
    const auto& h = p.local[k];
    Vector l = Vector::Zero(p.x.rows());
    for (Eigen::Index i = 0; i < p.x.rows(); ++i)
      if (p.region[i] == k) l[i] = kern(x0, p.x.row(i).transpose(), h.variance, h.lengthscales);
    return l;
  }

  // l' (L + S)^{-1} (Lambda + S - G_nm Q^{-1} G_mn) (Lambda + S)^{-1} (Y - mu), literal form.
  double local_mean(const Vector& x0) const {
    const std::size_t k = nearest(p.centers, x0);
    const auto& h = p.global;
    const Matrix gmn = kmat(p.xg, p.x, h.variance, h.lengthscales);
    Matrix ls_plus = lam_sig_inv.inverse();
    const Matrix middle = ls_plus - gmn.transpose() * q_inv * gmn;
    Matrix ln = big_l();
    ln.diagonal() += p.noise;
    return small_l(x0, k).dot(ln.inverse() * middle * lam_sig_inv * centered());
  }

  // tau_k^2 - l' (L + S)^{-1} l
  double local_var(const Vector& x0) const {
    const std::size_t k = nearest(p.centers, x0);
    Matrix ln = big_l();
    ln.diagonal() += p.noise;
    const Vector l = small_l(x0, k);
    return p.local[k].variance - l.dot(ln.inverse() * l);
  }

  // tau_k^2 - l_k' L_k^{-1} l_k (no noise), solved by full-pivot LU.
  double local_spatial_var(const Vector& x0, std::size_t k) const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < p.x.rows(); ++i)
      if (p.region[i] == k) idx.push_back(i);
    const auto& h = p.local[k];
    if (idx.empty()) return h.variance;
    Matrix xk(static_cast<Eigen::Index>(idx.size()), p.x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) xk.row(static_cast<Eigen::Index>(i)) = p.x.row(idx[i]);
    const Matrix lk = kmat(xk, xk, h.variance, h.lengthscales);
    const Vector l = kmat(xk, x0.transpose(), h.variance, h.lengthscales).col(0);
    return h.variance - l.dot(lk.fullPivLu().solve(l));
  }

  // One-stage predictor with everything in a single n x n inverse. With
  // include_local = false it drops L and l (the global-only special case).
  double one_stage_mean(const Vector& x0, bool include_local) const {
    const auto& h = p.global;
    const Vector g = kmat(p.xg, x0.transpose(), h.variance, h.lengthscales).col(0);
    const Matrix gmn = kmat(p.xg, p.x, h.variance, h.lengthscales);
    const std::size_t k = nearest(p.centers, x0);
    Vector row = gmn.transpose() * gm_inv * g;
    Matrix c = gmn.transpose() * gm_inv * gmn;
    c += lam_sig_inv.inverse();
    if (include_local) {
      row += small_l(x0, k);
      c += big_l();
    }
    return h.mean + row.dot(c.inverse() * centered());
  }

  double one_stage_var(const Vector& x0, bool include_local) const {
    const auto& h = p.global;
    const Vector g = kmat(p.xg, x0.transpose(), h.variance, h.lengthscales).col(0);
    const Matrix gmn = kmat(p.xg, p.x, h.variance, h.lengthscales);
    const std::size_t k = nearest(p.centers, x0);
    Vector row = gmn.transpose() * gm_inv * g;
    Matrix c = gmn.transpose() * gm_inv * gmn;
    c += lam_sig_inv.inverse();
    double prior = h.variance;
    if (include_local) {
      row += small_l(x0, k);
      c += big_l();
      prior += p.local[k].variance;
    }
    return prior - row.dot(c.inverse() * row);
  }
};

// Plain full GP with explicit inverse: mean and latent variance.
inline std::pair<double, double> full_gp(const Matrix& x, const Vector& y, const Vector& noise,
                                         const cglo::GPHyperparams& h, const Vector& x0) {
  Matrix c = kmat(x, x, h.variance, h.lengthscales);
  c.diagonal() += noise;
  const Matrix ci = c.inverse();
  const Vector k = kmat(x, x0.transpose(), h.variance, h.lengthscales).col(0);
  const Vector r = (y.array() - h.mean).matrix();
  return {h.mean + k.dot(ci * r), h.variance - k.dot(ci * k)};
}

// Monte Carlo estimate of E max(best - Y, 0), Y ~ N(mean, sd^2), and its standard error.
inline std::pair<double, double> mc_ei(double best, double mean, double sd, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  double s = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double v = std::max(best - (mean + sd * z(rng)), 0.0);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(draws);
  const double m = s / n;
  const double var = std::max(s2 / n - m * m, 0.0);
  return {m, std::sqrt(var / n)};
}

// Continuous OCBA allocation evaluated directly from the ratio form.
inline std::vector<double> ocba_continuous(const std::vector<cglo::OcbaEntry>& e, double total) {
  const std::size_t n = e.size();
  std::vector<double> out(n, 0.0);
  if (n == 1) {
    out[0] = total;
    return out;
  }
  std::size_t b = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (e[i].mean < e[b].mean || (e[i].mean == e[b].mean && e[i].id < e[b].id)) b = i;
  std::size_t ref = b == 0 ? 1 : 0;
  auto sd = [&](std::size_t i) { return std::max(e[i].sd, 1e-6); };
  auto delta = [&](std::size_t i) { return std::max(e[i].mean - e[b].mean, 1e-6); };
  // ratio of N_i to N_ref
  std::vector<double> r(n, 0.0);
  const double ref_w = std::pow(sd(ref) / delta(ref), 2);
  double sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == b) continue;
    r[i] = std::pow(sd(i) / delta(i), 2) / ref_w;
    sumsq += std::pow(r[i] / sd(i), 2);
  }
  r[b] = sd(b) * std::sqrt(sumsq);
  double s = 0.0;
  for (double v : r) s += v;
  for (std::size_t i = 0; i < n; ++i) out[i] = total * r[i] / s;
  return out;
}

// Random well-conditioned two-stage instance.
struct Instance {
  cglo::Dataset data;
  std::optional<cglo::Partition> partition;
  cglo::InducingSet inducing;
  cglo::GPHyperparams global;
  std::vector<cglo::GPHyperparams> local;

  Problem problem() const {
    Problem p;
    p.x = data.x();
    p.y = data.y();
    p.noise = data.mean_noise_var();
    for (const auto& pt : data.points) p.region.push_back(pt.region);
    p.centers = partition->centers();
    p.xg = inducing.points;
    p.global = global;
    p.local = local;
    return p;
  }

  cglo::AGLGPModel model() const {
    return cglo::AGLGPModel::assemble(data, *partition, inducing, global, local);
  }
};

inline double min_dist(const Matrix& pts) {
  double m = 1e300;
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) m = std::min(m, (pts.row(i) - pts.row(j)).norm());
  return m;
}

inline double cond(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const auto ev = es.eigenvalues();
  return ev.maxCoeff() / std::max(ev.minCoeff(), 1e-300);
}

// n design points (2..4 reps, random spread), m inducing points, K regions.
// When inducing_at_design is set the inducing set equals the design inputs.
inline Instance random_instance(std::uint64_t seed, std::size_t n, std::size_t m, std::size_t d, std::size_t k,
                                bool inducing_at_design = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Instance inst;
    inst.data.dim = d;
    inst.data.bounds = cglo::Box::unit(d);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = u(rng);
    if (n > 1 && min_dist(x) < 0.2 / std::pow(double(n), 1.0 / double(d))) continue;

    inst.global.mean = 4.0 * u(rng) - 2.0;
    inst.global.variance = 0.5 + 1.5 * u(rng);
    inst.global.lengthscales = Vector(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < inst.global.lengthscales.size(); ++j) inst.global.lengthscales[j] = 1.0 + 4.0 * u(rng);

    Matrix xg;
    if (inducing_at_design) {
      xg = x;
    } else {
      xg = Matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
      for (Eigen::Index i = 0; i < xg.rows(); ++i)
        for (Eigen::Index j = 0; j < xg.cols(); ++j) xg(i, j) = u(rng);
      if (m > 1 && min_dist(xg) < 0.5 / std::pow(double(m), 1.0 / double(d))) continue;
    }
    // sharpen the kernel until G_m is comfortably invertible
    while (cond(kmat(xg, xg, inst.global.variance, inst.global.lengthscales)) > 1e6) inst.global.lengthscales *= 1.5;

    inst.partition = cglo::build_partition(x, k, seed + 17, inst.data.bounds);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      cglo::DesignPoint p;
      p.x = x.row(i).transpose();
      p.reps = 2 + static_cast<int>(3 * u(rng));
      p.sample_mean = std::sin(3.0 * p.x.sum()) + 0.5 * u(rng);
      p.sample_var = 0.05 + 0.5 * u(rng);
      p.region = inst.partition->assign(p.x);
      inst.data.points.push_back(p);
    }
    for (std::size_t r = 0; r < k; ++r) {
      cglo::GPHyperparams h;
      h.mean = 0.0;
      h.variance = 0.1 + 0.9 * u(rng);
      h.lengthscales = inst.global.lengthscales;
      for (Eigen::Index j = 0; j < h.lengthscales.size(); ++j) h.lengthscales[j] += 5.0 * u(rng);
      inst.local.push_back(h);
    }
    inst.inducing.points = xg;
    inst.inducing.per_region_counts.assign(k, 0);
    for (Eigen::Index i = 0; i < xg.rows(); ++i) {
      const auto r = inst.partition->nearest_center(xg.row(i).transpose());
      inst.inducing.source_region.push_back(r);
      ++inst.inducing.per_region_counts[r];
    }
    inst.inducing.min_pairwise_distance = xg.rows() > 1 ? min_dist(xg) : std::sqrt(double(d)) / 10.0;
    return inst;
  }
}

inline Vector random_point(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = u(rng);
  return x;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace oracle
