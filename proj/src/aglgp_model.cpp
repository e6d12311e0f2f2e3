#include "cglo/aglgp_model.hpp"

#include "cglo/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cglo {

namespace {

constexpr double kCoincident = 1e-12;

HyperparamBounds stage_bounds(const GPData& data, std::optional<double> fixed_mean,
                              const ModelOptions& options) {
  auto b = default_bounds(data, fixed_mean);
  if (options.lengthscale_lo.size() == b.lengthscale_lo.size()) b.lengthscale_lo = options.lengthscale_lo;
  if (options.lengthscale_hi.size() == b.lengthscale_hi.size()) b.lengthscale_hi = options.lengthscale_hi;
  return b;
}

std::size_t distinct_rows(const Matrix& x) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    bool seen = false;
    for (Eigen::Index j = 0; j < i && !seen; ++j) seen = (x.row(i) - x.row(j)).norm() <= kCoincident;
    if (!seen) ++count;
  }
  return count;
}

Matrix rows_of(const Dataset& data, const std::vector<std::size_t>& idx) {
  Matrix x(to_index(idx.size()), to_index(data.dim));
  for (std::size_t i = 0; i < idx.size(); ++i) x.row(to_index(i)) = data.points[idx[i]].x.transpose();
  return x;
}

}  // namespace

void AGLGPModel::build_global(const Dataset& data, const InducingSet& ind, const GPHyperparams& hp) {
  design_x_ = data.x();
  const Vector y = data.y();
  global_.hp = hp;
  global_.inducing = ind;
  global_.system.emplace(design_x_, ind.points, data.mean_noise_var(), hp);
  global_.weights = global_.system->predictor_weights(Vector(y.array() - hp.mean));
  global_.at_design = (global_.system->at_training(global_.weights).array() + hp.mean).matrix();
}

void AGLGPModel::build_local(const Dataset& data, RegionId k, const GPHyperparams& hp,
                             bool likelihood_fit) {
  LocalModel local;
  local.region = k;
  local.hp = hp;
  local.hp.mean = 0.0;
  local.likelihood_fit = likelihood_fit;
  local.members = data.members(k);
  local.x = rows_of(data, local.members);
  const Vector noise = data.mean_noise_var();
  local.residuals.resize(to_index(local.members.size()));
  local.noise_var.resize(to_index(local.members.size()));
  for (std::size_t i = 0; i < local.members.size(); ++i) {
    const auto j = local.members[i];
    local.residuals[to_index(i)] = data.points[j].sample_mean - global_.at_design[to_index(j)];
    local.noise_var[to_index(i)] = noise[to_index(j)];
  }
  if (!local.members.empty()) {
    Matrix l = cross_covariance(local.x, local.x, local.hp);
    local.spatial = CholeskyFactor::factorize(l, local.hp.variance);
    l.diagonal() += local.noise_var;
    local.noisy = CholeskyFactor::factorize(l, local.hp.variance);
    local.weights = local.noisy->solve(local.residuals);
  }
  if (locals_.size() <= k) locals_.resize(k + 1);
  locals_[k] = std::move(local);
}

AGLGPModel AGLGPModel::fit_two_stage(const Dataset& data, const Partition& p, const InducingSet& ind,
                                     const ModelOptions& options, const AGLGPModel* warm) {
  if (data.size() < 3) throw std::invalid_argument("fit_two_stage: need at least 3 design points");
  AGLGPModel model(p);

  const GPData gdata{data.x(), data.y(), data.mean_noise_var()};
  FitOptions gopt = options.fit;
  if (warm) gopt.warm_start = warm->global_.hp;
  GPHyperparams ghp;
  try {
    ghp = fit_hyperparams(gdata, FitcStructure{ind.points}, stage_bounds(gdata, std::nullopt, options),
                          std::nullopt, gopt)
              .hp;
  } catch (const FittingFailedError& e) {
    throw FittingFailedError(std::string("global stage: ") + e.what());
  }
  model.build_global(data, ind, ghp);

  for (RegionId k = 0; k < p.size(); ++k) {
    const auto members = data.members(k);
    const Matrix xk = rows_of(data, members);
    GPHyperparams lhp;
    bool by_likelihood = false;
    if (distinct_rows(xk) >= 2) {
      GPData ldata{xk, Vector(to_index(members.size())), Vector(to_index(members.size()))};
      const Vector noise = gdata.noise_var;
      for (std::size_t i = 0; i < members.size(); ++i) {
        ldata.y[to_index(i)] = data.points[members[i]].sample_mean - model.global_.at_design[to_index(members[i])];
        ldata.noise_var[to_index(i)] = noise[to_index(members[i])];
      }
      FitOptions lopt = options.fit;
      lopt.seed = mix_seed(options.fit.seed, k + 1);
      lopt.warm_start.reset();
      if (warm && k < warm->locals_.size()) lopt.warm_start = warm->locals_[k].hp;
      try {
        lhp = fit_hyperparams(ldata, FullStructure{}, stage_bounds(ldata, 0.0, options), ghp.lengthscales, lopt).hp;
      } catch (const FittingFailedError& e) {
        throw FittingFailedError("local stage, region " + std::to_string(k) + ": " + e.what());
      }
      by_likelihood = true;
    } else {
      double ss = 0.0;
      for (auto j : members) {
        const double r = data.points[j].sample_mean - model.global_.at_design[to_index(j)];
        ss += r * r;
      }
      lhp.variance = members.empty() ? ghp.variance
                                     : std::max(kVarianceFloor, ss / static_cast<double>(members.size()));
      lhp.lengthscales = ghp.lengthscales;
    }
    model.build_local(data, k, lhp, by_likelihood);
  }
  return model;
}

AGLGPModel AGLGPModel::assemble(const Dataset& data, const Partition& p, const InducingSet& ind,
                                const GPHyperparams& global, const std::vector<GPHyperparams>& local) {
  if (local.size() != p.size()) throw std::invalid_argument("assemble: one local model per region required");
  AGLGPModel model(p);
  model.build_global(data, ind, global);
  for (RegionId k = 0; k < p.size(); ++k) model.build_local(data, k, local[k], true);
  return model;
}

AGLGPModel AGLGPModel::refresh(const Dataset& data, const InducingSet& ind) const {
  AGLGPModel model(partition_);
  model.build_global(data, ind, global_.hp);
  for (RegionId k = 0; k < partition_.size(); ++k) {
    model.build_local(data, k, locals_[k].hp, locals_[k].likelihood_fit);
  }
  return model;
}

std::vector<GPHyperparams> AGLGPModel::local_hyperparams() const {
  std::vector<GPHyperparams> out;
  for (const auto& l : locals_) out.push_back(l.hp);
  return out;
}

Prediction AGLGPModel::predict_global(const VectorRef& x0) const {
  const auto& hp = global_.hp;
  const Vector g = cross_covariance(global_.inducing.points, x0, hp);
  const Vector w = global_.system->whiten(g);
  Prediction p;
  p.mean = hp.mean + w.dot(global_.weights);
  const double var = hp.variance - w.squaredNorm() + global_.system->quad_a_inverse(w);
  p.variance = std::clamp(var, 0.0, hp.variance);
  return p;
}

Prediction AGLGPModel::predict_local(const VectorRef& x0, RegionId k) const {
  const auto& local = locals_.at(k);
  if (local.members.empty()) return {0.0, local.hp.variance};
  const Vector l = cross_covariance(local.x, x0, local.hp);
  Prediction p;
  p.mean = l.dot(local.weights);
  const double var = local.hp.variance - local.noisy->solve_lower(l).squaredNorm();
  p.variance = std::clamp(var, 0.0, local.hp.variance);
  return p;
}

Prediction AGLGPModel::predict_local(const VectorRef& x0) const {
  return predict_local(x0, partition_.assign(x0));
}

Prediction AGLGPModel::predict_overall(const VectorRef& x0) const {
  const auto g = predict_global(x0);
  const auto l = predict_local(x0);
  return {g.mean + l.mean, g.variance + l.variance};
}

double AGLGPModel::local_spatial_variance(const VectorRef& x0, RegionId k) const {
  const auto& local = locals_.at(k);
  if (local.members.empty()) return local.hp.variance;
  for (Eigen::Index i = 0; i < local.x.rows(); ++i) {
    if ((local.x.row(i).transpose() - x0).norm() <= kCoincident) return 0.0;
  }
  const Vector l = cross_covariance(local.x, x0, local.hp);
  const double var = local.hp.variance - local.spatial->solve_lower(l).squaredNorm();
  return std::clamp(var, 0.0, local.hp.variance);
}

CrossValidationReport loo_cross_validate(const AGLGPModel& model, const Dataset& data, double threshold) {
  if (data.size() < 3) throw std::invalid_argument("loo_cross_validate: need at least 3 points");
  const Vector noise = data.mean_noise_var();
  CrossValidationReport report;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Dataset reduced = data;
    reduced.points.erase(reduced.points.begin() + static_cast<std::ptrdiff_t>(i));
    const auto loo = model.refresh(reduced, model.global().inducing);
    const auto& p = data.points[i];
    const auto pred = loo.predict_overall(p.x);
    const double sd = std::sqrt(pred.variance + noise[to_index(i)]);
    const double z = sd > 0.0 ? (p.sample_mean - pred.mean) / sd : 0.0;
    report.standardized_residuals.push_back(z);
    report.max_abs_residual = std::max(report.max_abs_residual, std::abs(z));
  }
  report.passed = report.max_abs_residual <= threshold;
  return report;
}

}  // namespace cglo
