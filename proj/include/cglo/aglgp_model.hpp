#pragma once

// Two-stage additive global/local GP surrogate.
//
// Stage one fits a FITC global trend over the inducing points by maximizing its
// marginal likelihood. Its predictions at the design points leave residuals,
// and stage two fits one zero-mean GP per region to those residuals with
// lengthscales floored at the global ones. Predictions:
//
//   global  mean  mu + g' Q_m^{-1} G_mn (Lambda + S)^{-1} (Y - mu)
//           var   sigma^2 - g' G_m^{-1} g + g' Q_m^{-1} g
//   local   mean  l' (L + S)^{-1} (Y - yhat_g(X))        (l nonzero only in x0's region)
//           var   tau_k^2 - l' (L + S)^{-1} l
//   overall mean  global + local, var global + local
//
// where S holds the variance of each sample mean.

#include "cglo/dataset.hpp"
#include "cglo/gp_core.hpp"
#include "cglo/inducing.hpp"
#include "cglo/partition.hpp"

#include <optional>
#include <vector>

namespace cglo {

struct ModelOptions {
  FitOptions fit;
  /// Lengthscale search box, applied to both stages. Empty means [1e-3, 1e3].
  Vector lengthscale_lo;
  Vector lengthscale_hi;
};

struct GlobalModel {
  GPHyperparams hp;
  InducingSet inducing;
  std::optional<FitcSystem> system;
  /// A^{-1} V D^{-1} (Y - mu).
  Vector weights;
  /// Global predictions at every design point.
  Vector at_design;
};

struct LocalModel {
  RegionId region = 0;
  GPHyperparams hp;
  std::vector<std::size_t> members;
  Matrix x;
  Vector residuals;
  Vector noise_var;
  std::optional<CholeskyFactor> noisy;    // L_k + S_k
  std::optional<CholeskyFactor> spatial;  // L_k
  Vector weights;                         // (L_k + S_k)^{-1} residuals
  /// False when the region had fewer than two distinct points and the
  /// hyperparameters were set by the fallback rule.
  bool likelihood_fit = true;
};

class AGLGPModel {
 public:
  /// Two-stage fit. With `warm` given, its hyperparameters seed the optimizers.
  static AGLGPModel fit_two_stage(const Dataset& data, const Partition& p, const InducingSet& ind,
                                  const ModelOptions& options, const AGLGPModel* warm = nullptr);

  /// Builds the model for given hyperparameters without any likelihood search.
  static AGLGPModel assemble(const Dataset& data, const Partition& p, const InducingSet& ind,
                             const GPHyperparams& global, const std::vector<GPHyperparams>& local);

  /// Same hyperparameters, recomputed residuals and factorizations.
  AGLGPModel refresh(const Dataset& data, const InducingSet& ind) const;

  Prediction predict_global(const VectorRef& x0) const;
  Prediction predict_local(const VectorRef& x0) const;
  Prediction predict_local(const VectorRef& x0, RegionId k) const;
  Prediction predict_overall(const VectorRef& x0) const;

  /// tau_k^2 - l' L_k^{-1} l (no observation noise); exactly 0 at design points.
  double local_spatial_variance(const VectorRef& x0, RegionId k) const;

  const Partition& partition() const { return partition_; }
  const GlobalModel& global() const { return global_; }
  const std::vector<LocalModel>& locals() const { return locals_; }
  const LocalModel& local(RegionId k) const { return locals_.at(k); }
  std::vector<GPHyperparams> local_hyperparams() const;
  /// Design inputs the model was built on (rows follow the dataset order).
  const Matrix& design_x() const { return design_x_; }

 private:
  AGLGPModel(Partition p) : partition_(std::move(p)) {}
  void build_global(const Dataset& data, const InducingSet& ind, const GPHyperparams& hp);
  void build_local(const Dataset& data, RegionId k, const GPHyperparams& hp, bool likelihood_fit);

  Partition partition_;
  GlobalModel global_;
  std::vector<LocalModel> locals_;
  Matrix design_x_;
};

struct CrossValidationReport {
  std::vector<double> standardized_residuals;
  double max_abs_residual = 0.0;
  bool passed = true;
};

/// Leave-one-out check with hyperparameters frozen: each point is predicted by
/// the model rebuilt without it; residuals are standardized by
/// sqrt(predictive variance + noise variance of the mean). Passes iff all |r| <= 3.
CrossValidationReport loo_cross_validate(const AGLGPModel& model, const Dataset& data,
                                         double threshold = 3.0);

}  // namespace cglo
