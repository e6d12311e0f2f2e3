#include "cglo/gp_core.hpp"

#include "cglo/sampling.hpp"
#include "simplex.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cglo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)

// Pivots smaller than this (relative to the scale) are treated as breakdown.
constexpr double kMinPivotRatio = 1e-13;

bool good_factor(const Eigen::LLT<Matrix>& llt, double scale) {
  if (llt.info() != Eigen::Success) return false;
  if (llt.rows() == 0) return true;
  const Vector diag = llt.matrixLLT().diagonal();
  if (!diag.allFinite()) return false;
  return diag.minCoeff() * diag.minCoeff() > kMinPivotRatio * scale;
}

}  // namespace

double gauss_corr(const VectorRef& a, const VectorRef& b, const Vector& lengthscales) {
  if (a.size() != b.size() || a.size() != lengthscales.size()) {
    throw std::invalid_argument("gauss_corr: dimension mismatch");
  }
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += lengthscales[k] * diff * diff;
  }
  return std::exp(-s);
}

Matrix cross_covariance(const Matrix& a, const Matrix& b, const GPHyperparams& hp) {
  if (a.cols() != b.cols() || a.cols() != hp.lengthscales.size()) {
    throw std::invalid_argument("cross_covariance: dimension mismatch");
  }
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double diff = a(i, k) - b(j, k);
        s += hp.lengthscales[k] * diff * diff;
      }
      out(i, j) = hp.variance * std::exp(-s);
    }
  }
  return out;
}

Vector cross_covariance(const Matrix& a, const VectorRef& x, const GPHyperparams& hp) {
  if (a.cols() != x.size() || x.size() != hp.lengthscales.size()) {
    throw std::invalid_argument("cross_covariance: dimension mismatch");
  }
  Vector out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      const double diff = a(i, k) - x[k];
      s += hp.lengthscales[k] * diff * diff;
    }
    out[i] = hp.variance * std::exp(-s);
  }
  return out;
}

CholeskyFactor CholeskyFactor::factorize(const Matrix& a, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  CholeskyFactor f;
  f.llt_.compute(a);
  if (good_factor(f.llt_, scale)) return f;
  for (double rel = kFirstJitter; rel <= kMaxJitter * (1.0 + 1e-9); rel *= 10.0) {
    Matrix b = a;
    b.diagonal().array() += rel * scale;
    f.llt_.compute(b);
    if (good_factor(f.llt_, scale)) {
      f.jitter_ = rel * scale;
      return f;
    }
  }
  std::ostringstream msg;
  msg << "covariance of size " << a.rows() << " not factorizable with jitter up to "
      << kMaxJitter * scale;
  throw IllConditionedError(msg.str(), kMaxJitter * scale, a.rows());
}

double CholeskyFactor::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Vector CholeskyFactor::solve_lower(const VectorRef& b) const {
  return llt_.matrixL().solve(b);
}

Matrix CholeskyFactor::solve_lower_matrix(const Matrix& b) const {
  return llt_.matrixL().solve(b);
}

CovMatrix build_cov(const Matrix& points, const GPHyperparams& hp, const Vector& nugget) {
  if (points.rows() == 0) throw std::invalid_argument("build_cov: no points");
  if (nugget.size() != 0 && nugget.size() != points.rows()) {
    throw std::invalid_argument("build_cov: nugget length mismatch");
  }
  CovMatrix cov;
  cov.entries = cross_covariance(points, points, hp);
  if (nugget.size() != 0) cov.entries.diagonal() += nugget;
  cov.jitter_used = CholeskyFactor::factorize(cov.entries, hp.variance).jitter();
  return cov;
}

FullGP::FullGP(GPData data, GPHyperparams hp) : data_(std::move(data)), hp_(std::move(hp)) {
  if (data_.size() == 0) throw std::invalid_argument("FullGP: no design points");
  Matrix c = cross_covariance(data_.x, data_.x, hp_);
  c.diagonal() += data_.noise_or_zero();
  factor_ = CholeskyFactor::factorize(c, hp_.variance);
  weights_ = factor_.solve(Vector(data_.y.array() - hp_.mean));
}

Prediction FullGP::predict(const VectorRef& x0) const {
  const Vector r = cross_covariance(data_.x, x0, hp_);
  const Vector half = factor_.solve_lower(r);
  Prediction p;
  p.mean = hp_.mean + r.dot(weights_);
  p.variance = std::max(0.0, hp_.variance - half.squaredNorm());
  return p;
}

Prediction full_gp_predict(const GPData& data, const GPHyperparams& hp, const VectorRef& x0) {
  return FullGP(data, hp).predict(x0);
}

FitcSystem::FitcSystem(const Matrix& x, const Matrix& inducing, const Vector& noise_var,
                       const GPHyperparams& hp)
    : inducing_(inducing), hp_(hp) {
  if (inducing.rows() == 0) throw std::invalid_argument("FitcSystem: no inducing points");
  const Eigen::Index n = x.rows();
  const Eigen::Index m = inducing.rows();
  const Vector noise = noise_var.size() == 0 ? Vector::Zero(n) : noise_var;
  if (noise.size() != n) throw std::invalid_argument("FitcSystem: noise length mismatch");

  gm_factor_ = CholeskyFactor::factorize(cross_covariance(inducing, inducing, hp), hp.variance);
  v_ = gm_factor_.solve_lower_matrix(cross_covariance(inducing, x, hp));

  lambda_.resize(n);
  d_.resize(n);
  const double d_floor = CholeskyFactor::kFirstJitter * hp.variance;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double raw = hp.variance - v_.col(i).squaredNorm();
    if (raw < 0.0) lambda_clamp_ = std::max(lambda_clamp_, -raw);
    lambda_[i] = std::max(0.0, raw);
    d_[i] = std::max(lambda_[i] + noise[i], d_floor);
  }

  const Matrix scaled = v_ * d_.cwiseSqrt().cwiseInverse().asDiagonal();
  Matrix a = Matrix::Identity(m, m);
  a.noalias() += scaled * scaled.transpose();
  a_factor_ = CholeskyFactor::factorize(a, 1.0);
}

double FitcSystem::log_det() const {
  return d_.array().log().sum() + a_factor_.log_det();
}

Vector FitcSystem::solve(const VectorRef& r) const {
  const Vector dr = r.cwiseQuotient(d_);
  const Vector t = a_factor_.solve(Vector(v_ * dr));
  return dr - (v_.transpose() * t).cwiseQuotient(d_);
}

Vector FitcSystem::predictor_weights(const VectorRef& r) const {
  return a_factor_.solve(Vector(v_ * r.cwiseQuotient(d_)));
}

double FitcSystem::quad_a_inverse(const Vector& w) const {
  return a_factor_.solve_lower(w).squaredNorm();
}

namespace {

double full_nll(const GPData& data, const GPHyperparams& hp) {
  Matrix c = cross_covariance(data.x, data.x, hp);
  c.diagonal() += data.noise_or_zero();
  const auto f = CholeskyFactor::factorize(c, hp.variance);
  const Vector r = data.y.array() - hp.mean;
  const Vector half = f.solve_lower(r);
  return 0.5 * (half.squaredNorm() + f.log_det() + static_cast<double>(data.size()) * kLog2Pi);
}

double fitc_nll(const GPData& data, const GPHyperparams& hp, const Matrix& inducing) {
  const FitcSystem sys(data.x, inducing, data.noise_or_zero(), hp);
  const Vector r = data.y.array() - hp.mean;
  return 0.5 * (r.dot(sys.solve(r)) + sys.log_det() + static_cast<double>(data.size()) * kLog2Pi);
}

}  // namespace

double neg_log_likelihood(const GPData& data, const GPHyperparams& hp, const Structure& structure) {
  if (data.size() == 0) throw std::invalid_argument("neg_log_likelihood: no data");
  if (const auto* fitc = std::get_if<FitcStructure>(&structure)) {
    return fitc_nll(data, hp, fitc->inducing);
  }
  return full_nll(data, hp);
}

double gls_mean(const GPData& data, const GPHyperparams& hp, const Structure& structure) {
  const Vector ones = Vector::Ones(data.size());
  Vector c_ones;
  if (const auto* fitc = std::get_if<FitcStructure>(&structure)) {
    const FitcSystem sys(data.x, fitc->inducing, data.noise_or_zero(), hp);
    c_ones = sys.solve(ones);
  } else {
    Matrix c = cross_covariance(data.x, data.x, hp);
    c.diagonal() += data.noise_or_zero();
    c_ones = CholeskyFactor::factorize(c, hp.variance).solve(ones);
  }
  return c_ones.dot(data.y) / c_ones.sum();
}

HyperparamBounds default_bounds(const GPData& data, std::optional<double> fixed_mean) {
  const auto d = data.x.cols();
  HyperparamBounds b;
  b.lengthscale_lo = Vector::Constant(d, 1e-3);
  b.lengthscale_hi = Vector::Constant(d, 1e3);
  b.fixed_mean = fixed_mean;
  double scale = 0.0;
  if (data.size() > 0) {
    if (fixed_mean) {
      scale = (data.y.array() - *fixed_mean).square().mean();
    } else {
      scale = (data.y.array() - data.y.mean()).square().mean();
    }
  }
  b.variance_lo = kVarianceFloor;
  b.variance_hi = std::max(10.0 * scale, 100.0 * kVarianceFloor);
  return b;
}

FitResult fit_hyperparams(const GPData& data, const Structure& structure,
                          const HyperparamBounds& bounds,
                          const std::optional<Vector>& lengthscale_floor,
                          const FitOptions& options) {
  const Eigen::Index d = data.x.cols();
  if (data.size() < 2) throw std::invalid_argument("fit_hyperparams: need at least 2 points");
  if (bounds.lengthscale_lo.size() != d || bounds.lengthscale_hi.size() != d) {
    throw std::invalid_argument("fit_hyperparams: bound dimension mismatch");
  }

  Vector ls_lo = bounds.lengthscale_lo;
  Vector ls_hi = bounds.lengthscale_hi;
  if (lengthscale_floor) {
    if (lengthscale_floor->size() != d) {
      throw std::invalid_argument("fit_hyperparams: floor dimension mismatch");
    }
    ls_lo = ls_lo.cwiseMax(*lengthscale_floor);
    ls_hi = ls_hi.cwiseMax(ls_lo);
  }
  const double var_lo = std::max(bounds.variance_lo, kVarianceFloor);
  const double var_hi = std::max(bounds.variance_hi, var_lo);

  // z = (log variance, log lengthscales)
  Vector lo(d + 1), hi(d + 1);
  lo[0] = std::log(var_lo);
  hi[0] = std::log(var_hi);
  lo.tail(d) = ls_lo.array().max(1e-300).log();
  hi.tail(d) = ls_hi.array().max(1e-300).log();

  auto decode = [&](const Vector& z) {
    GPHyperparams hp;
    hp.variance = std::clamp(std::exp(z[0]), var_lo, var_hi);
    hp.lengthscales = z.tail(d).array().exp().matrix().cwiseMax(ls_lo).cwiseMin(ls_hi);
    hp.mean = bounds.fixed_mean.value_or(0.0);
    if (!bounds.fixed_mean) hp.mean = gls_mean(data, hp, structure);
    return hp;
  };
  auto objective = [&](const Vector& z) {
    try {
      return neg_log_likelihood(data, decode(z), structure);
    } catch (const IllConditionedError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<Vector> starts;
  if (options.warm_start && options.warm_start->lengthscales.size() == d) {
    Vector z(d + 1);
    z[0] = std::log(std::max(options.warm_start->variance, kVarianceFloor));
    z.tail(d) = options.warm_start->lengthscales.array().max(1e-300).log();
    starts.push_back(z.cwiseMax(lo).cwiseMin(hi));
  }
  if (options.starts > 0) {
    Rng rng(options.seed);
    const Matrix lhs = latin_hypercube(static_cast<std::size_t>(options.starts), Box{lo, hi}, rng);
    for (Eigen::Index i = 0; i < lhs.rows(); ++i) starts.emplace_back(lhs.row(i).transpose());
  }
  if (starts.empty()) starts.push_back((lo + hi) / 2.0);

  FitResult best;
  best.nll = std::numeric_limits<double>::infinity();
  Vector best_z;
  for (const auto& z0 : starts) {
    const auto res = detail::minimize_in_box(objective, z0, lo, hi, options.max_evals_per_start);
    best.evaluations += res.evaluations;
    if (res.value < best.nll) {
      best.nll = res.value;
      best_z = res.x;
    }
  }
  if (!std::isfinite(best.nll)) {
    std::ostringstream msg;
    msg << "hyperparameter fit failed: no start produced a factorizable covariance (n="
        << data.size() << ", starts=" << starts.size() << ")";
    throw FittingFailedError(msg.str());
  }
  best.hp = decode(best_z);
  return best;
}

}  // namespace cglo
