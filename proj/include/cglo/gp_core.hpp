#pragma once

// Gaussian-correlation kernel, covariance assembly with a jitter ladder,
// the full-GP reference predictor, full/FITC marginal likelihoods and the
// multi-start hyperparameter estimator shared by the global and local stages.

#include "cglo/types.hpp"

#include <cstdint>
#include <optional>
#include <variant>

namespace cglo {

/// Assumption "variances bounded away from zero", made concrete.
inline constexpr double kVarianceFloor = 1e-8;

struct GPHyperparams {
  double mean = 0.0;
  double variance = 1.0;
  /// Per-dimension rate parameters (1/length^2), all >= 0.
  Vector lengthscales;
};

/// exp(-sum_k ls_k (a_k - b_k)^2). Throws std::invalid_argument on dimension mismatch.
double gauss_corr(const VectorRef& a, const VectorRef& b, const Vector& lengthscales);

/// variance * corr between every row of `a` and every row of `b`.
Matrix cross_covariance(const Matrix& a, const Matrix& b, const GPHyperparams& hp);
/// variance * corr between every row of `a` and the single point `x`.
Vector cross_covariance(const Matrix& a, const VectorRef& x, const GPHyperparams& hp);

/// Cholesky factor of a symmetric PSD matrix. If plain factorization fails the
/// diagonal is inflated by 1e-10*scale, escalating x10 up to 1e-4*scale.
class CholeskyFactor {
 public:
  static constexpr double kFirstJitter = 1e-10;
  static constexpr double kMaxJitter = 1e-4;

  static CholeskyFactor factorize(const Matrix& a, double scale);

  double jitter() const { return jitter_; }
  Eigen::Index size() const { return llt_.rows(); }
  double log_det() const;

  Vector solve(const VectorRef& b) const { return llt_.solve(b); }
  /// L^{-1} b for the lower factor L.
  Vector solve_lower(const VectorRef& b) const;
  Matrix solve_lower_matrix(const Matrix& b) const;

 private:
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

struct CovMatrix {
  Matrix entries;
  /// Diagonal inflation needed for factorization; not included in `entries`.
  double jitter_used = 0.0;
};

/// Covariance of `points` under `hp` plus an optional diagonal nugget (empty
/// vector means none). Throws IllConditionedError when the ladder is exhausted.
CovMatrix build_cov(const Matrix& points, const GPHyperparams& hp, const Vector& nugget = {});

/// Observations for a single GP. `noise_var` holds the variance of each
/// observation (empty means noise-free).
struct GPData {
  Matrix x;
  Vector y;
  Vector noise_var;

  Eigen::Index size() const { return x.rows(); }
  Vector noise_or_zero() const {
    return noise_var.size() == 0 ? Vector::Zero(x.rows()) : noise_var;
  }
};

/// Standard GP predictor with cached factorization of R + Sigma_eps.
class FullGP {
 public:
  FullGP(GPData data, GPHyperparams hp);

  Prediction predict(const VectorRef& x0) const;
  const GPHyperparams& hyperparams() const { return hp_; }
  const GPData& data() const { return data_; }
  double jitter() const { return factor_.jitter(); }

 private:
  GPData data_;
  GPHyperparams hp_;
  CholeskyFactor factor_;
  Vector weights_;
};

Prediction full_gp_predict(const GPData& data, const GPHyperparams& hp, const VectorRef& x0);

/// FITC algebra for C = G_nm G_m^{-1} G_mn + Lambda + Sigma_eps, with
/// Lambda = diag(G_n - G_nm G_m^{-1} G_mn) clamped at zero.
///
/// Internally V = L_m^{-1} G_mn and A = I + V D^{-1} V' with D = Lambda + Sigma_eps,
/// so that Q_m = G_m + G_mn D^{-1} G_nm = L_m A L_m'.
class FitcSystem {
 public:
  FitcSystem(const Matrix& x, const Matrix& inducing, const Vector& noise_var,
             const GPHyperparams& hp);

  double log_det() const;
  /// C^{-1} r via the Woodbury identity.
  Vector solve(const VectorRef& r) const;
  /// A^{-1} V D^{-1} r: the weight vector of the global predictor.
  Vector predictor_weights(const VectorRef& r) const;

  /// V' w: evaluates a whitened predictor at every training input.
  Vector at_training(const Vector& w) const { return v_.transpose() * w; }

  /// w = L_m^{-1} g(x0).
  Vector whiten(const Vector& g) const { return gm_factor_.solve_lower(g); }
  /// w' A^{-1} w.
  double quad_a_inverse(const Vector& w) const;

  const Vector& lambda() const { return lambda_; }
  const Vector& diag_d() const { return d_; }
  /// Largest magnitude removed by clamping negative Lambda entries.
  double lambda_clamp() const { return lambda_clamp_; }
  const Matrix& inducing() const { return inducing_; }
  const GPHyperparams& hyperparams() const { return hp_; }

 private:
  Matrix inducing_;
  GPHyperparams hp_;
  CholeskyFactor gm_factor_;
  Matrix v_;
  Vector lambda_;
  Vector d_;
  double lambda_clamp_ = 0.0;
  CholeskyFactor a_factor_;
};

struct FullStructure {};
struct FitcStructure {
  Matrix inducing;
};
using Structure = std::variant<FullStructure, FitcStructure>;

/// 0.5 [ (Y-mu)' C^{-1} (Y-mu) + log det C + n log 2pi ].
double neg_log_likelihood(const GPData& data, const GPHyperparams& hp, const Structure& structure);

/// Generalized-least-squares estimate of the constant mean under the given
/// variance and lengthscales.
double gls_mean(const GPData& data, const GPHyperparams& hp, const Structure& structure);

struct HyperparamBounds {
  double variance_lo = kVarianceFloor;
  double variance_hi = 1.0;
  Vector lengthscale_lo;
  Vector lengthscale_hi;
  /// When set the mean is held at this value; otherwise it is profiled (GLS).
  std::optional<double> fixed_mean;
};

/// Lengthscales in [1e-3, 1e3] (inputs assumed scaled to the unit box);
/// variance in [kVarianceFloor, 10 * scale] where scale is the sample variance
/// of y (profiled mean) or its second moment (fixed mean).
HyperparamBounds default_bounds(const GPData& data, std::optional<double> fixed_mean);

struct FitOptions {
  int starts = 10;
  int max_evals_per_start = 400;
  std::uint64_t seed = 0;
  /// Extra start tried before the Latin-hypercube starts.
  std::optional<GPHyperparams> warm_start;
};

struct FitResult {
  GPHyperparams hp;
  double nll = 0.0;
  int evaluations = 0;
};

/// Multi-start bounded Nelder-Mead over (log variance, log lengthscales).
/// `lengthscale_floor` raises the lower lengthscale bound elementwise (local
/// models are kept at least as wiggly as the global trend).
FitResult fit_hyperparams(const GPData& data, const Structure& structure,
                          const HyperparamBounds& bounds,
                          const std::optional<Vector>& lengthscale_floor,
                          const FitOptions& options);

}  // namespace cglo
