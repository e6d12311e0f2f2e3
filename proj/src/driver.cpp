#include "cglo/driver.hpp"

#include "cglo/kernels.hpp"
#include "cglo/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace cglo {

namespace {

// Seed streams for the different random draws of one run.
enum Stream : std::uint64_t { kDesign = 1, kPartition, kInducing, kFit, kCandidates, kGrid };

std::uint64_t stream(std::uint64_t seed, Stream s) { return mix_seed(seed, s); }

InducingOptions inducing_options(const CGLOConfig& cfg) {
  InducingOptions o;
  o.seed = stream(cfg.seed, kInducing);
  return o;
}

ModelOptions model_options(const CGLOConfig& cfg, std::size_t starts, std::uint64_t salt) {
  ModelOptions o;
  o.fit.starts = static_cast<int>(starts);
  o.fit.seed = mix_seed(stream(cfg.seed, kFit), salt);
  return o;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void check_region_ids(Dataset& data, const Partition& p) {
  for (auto& pt : data.points) pt.region = p.assign(pt.x);
}

// Rebuild inducing points, radius and model after the data changed.
void refresh_model(CGLOState& s, bool allow_refit) {
  s.inducing = select_inducing(s.data, s.partition(), inducing_options(s.cfg));
  s.ctx.kappa_radius = s.inducing.min_pairwise_distance;
  if (allow_refit && s.points_since_refit >= s.cfg.refit_every) {
    const auto opts = model_options(s.cfg, s.cfg.refit_starts, s.data.size());
    s.model = AGLGPModel::fit_two_stage(s.data, s.partition(), s.inducing, opts, &*s.model);
    s.points_since_refit = 0;
  } else {
    s.model = s.model->refresh(s.data, s.inducing);
  }
}

double min_distance_to_design(const Dataset& data, const VectorRef& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : data.points) best = std::min(best, (p.x - x).norm());
  return best;
}

int min_reps_of(const Dataset& data) {
  int m = std::numeric_limits<int>::max();
  for (const auto& p : data.points) m = std::min(m, p.reps);
  return data.points.empty() ? 0 : m;
}

}  // namespace

CGLOConfig CGLOConfig::resolve(std::size_t dim) const {
  CGLOConfig c = *this;
  if (c.regions == 0) c.regions = default_region_count(c.n0, dim);
  if (c.init_reps == 0) c.init_reps = c.r_min;
  if (c.b2 == 0) c.b2 = c.r_min;
  if (c.candidate_count == 0) c.candidate_count = 20 * c.regions;
  if (c.local_grid_size == 0) c.local_grid_size = 100 * dim;
  return c;
}

void CGLOConfig::validate(std::size_t dim) const {
  const CGLOConfig c = resolve(dim);
  if (c.r_min < 1) throw ConfigError("r_min must be >= 1 (got " + std::to_string(c.r_min) + ")");
  if (c.init_reps < 1) throw ConfigError("init_reps must be >= 1 (got " + std::to_string(c.init_reps) + ")");
  if (c.b2 < 1) throw ConfigError("b2 must be >= 1 (got " + std::to_string(c.b2) + ")");
  if (c.regions < 1) throw ConfigError("K must be >= 1");
  if (c.n0 < 2 * c.regions) {
    throw ConfigError("n0 = " + std::to_string(c.n0) + " is smaller than 2K = 2*" + std::to_string(c.regions));
  }
  if (c.n0 < 3) throw ConfigError("n0 must be >= 3 (got " + std::to_string(c.n0) + ")");
  const long long init = static_cast<long long>(c.n0) * c.init_reps;
  if (c.total_budget < init) {
    throw ConfigError("total_budget = " + std::to_string(c.total_budget) + " is below n0*init_reps = " +
                      std::to_string(init));
  }
  if (!(c.kappa_coef > 0.0)) throw ConfigError("kappa_coef must be positive");
  if (!(c.v > 0.0)) throw ConfigError("v must be positive");
  if (c.mean_lo && c.mean_hi && !(*c.mean_lo < *c.mean_hi)) throw ConfigError("mean_lo must be below mean_hi");
  if (c.refit_every < 1) throw ConfigError("refit_every must be >= 1");
  if (c.fit_starts < 1 || c.refit_starts < 1) throw ConfigError("fit_starts and refit_starts must be >= 1");
  if (c.cv_retries < 0) throw ConfigError("cv_retries must be >= 0");
  const std::size_t per_region = std::max<std::size_t>(3, c.candidate_count / (2 * c.regions));
  if (c.candidate_count < per_region * c.regions) {
    throw ConfigError("candidate_count = " + std::to_string(c.candidate_count) +
                      " cannot cover K = " + std::to_string(c.regions) + " regions with " +
                      std::to_string(per_region) + " candidates each");
  }
}

Matrix region_grid(const Partition& p, RegionId k, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const Box& box = p.bounding_box(k);
  std::vector<Vector> kept;
  for (int round = 0; round < 50 && kept.size() < count; ++round) {
    const Matrix lhs = latin_hypercube(count, box, rng);
    for (Eigen::Index i = 0; i < lhs.rows() && kept.size() < count; ++i) {
      const Vector x = lhs.row(i).transpose();
      if (p.nearest_center(x) == k) kept.push_back(x);
    }
  }
  Matrix out(to_index(kept.size()), to_index(box.dim()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.row(to_index(i)) = kept[i].transpose();
  return out;
}

Matrix global_candidates(const Partition& p, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k_regions = p.size();
  const std::size_t need = std::max<std::size_t>(3, count / (2 * k_regions));
  const Matrix lhs = latin_hypercube(count, p.bounds(), rng);
  std::vector<Vector> pts;
  std::vector<std::size_t> per(k_regions, 0);
  for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
    pts.push_back(lhs.row(i).transpose());
    ++per[p.nearest_center(pts.back())];
  }
  for (RegionId k = 0; k < k_regions; ++k) {
    const Box& box = p.bounding_box(k);
    std::size_t tries = 0;
    while (per[k] < need) {
      if (++tries > 1000000) throw InvalidStateError("candidate top-up failed for region " + std::to_string(k));
      const Matrix u = uniform_sample(1, box, rng);
      const Vector x = u.row(0).transpose();
      if (p.nearest_center(x) != k) continue;
      pts.push_back(x);
      ++per[k];
    }
  }
  Matrix out(to_index(pts.size()), to_index(p.bounds().dim()));
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(to_index(i)) = pts[i].transpose();
  return out;
}

std::pair<Vector, double> incumbent(const StochasticObjective& objective, const Dataset& data) {
  const auto& best = data.points.at(data.best_index());
  return {objective.bounds().from_unit(best.x), objective.to_reported(best.sample_mean)};
}

CGLOState initialize(const StochasticObjective& objective, const CGLOConfig& raw) {
  const std::size_t d = objective.dim();
  raw.validate(d);
  const CGLOConfig cfg = raw.resolve(d);
  const StochasticObjective unit = objective.unit_view();

  Rng rng(stream(cfg.seed, kDesign));
  const Box box = Box::unit(d);
  const Matrix x0 = latin_hypercube(cfg.n0, box, rng);

  Dataset data;
  data.dim = d;
  data.bounds = box;
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    DesignPoint p;
    p.x = x0.row(i).transpose();
    const auto r = unit.evaluate(p.x, cfg.init_reps);
    p.merge(r.count, r.sample_mean, r.sample_var);
    data.points.push_back(std::move(p));
  }

  BudgetState budget;
  budget.total = cfg.total_budget;
  budget.consumed = data.total_reps();
  budget.r_min = cfg.r_min;
  budget.b2 = cfg.b2;
  budget.kappa_coef = cfg.kappa_coef;

  Partition partition = build_partition(x0, cfg.regions, stream(cfg.seed, kPartition), box);
  check_region_ids(data, partition);

  std::vector<std::string> warnings;
  InducingSet ind = select_inducing(data, partition, inducing_options(cfg));
  AGLGPModel model =
      AGLGPModel::fit_two_stage(data, partition, ind, model_options(cfg, cfg.fit_starts, 0));

  // Cross-validation: double the replications until the model passes.
  int reps = cfg.init_reps;
  for (int attempt = 0;; ++attempt) {
    const auto cv = loo_cross_validate(model, data);
    if (cv.passed) break;
    const long long extra = static_cast<long long>(data.size()) * reps;
    if (attempt >= cfg.cv_retries || extra > budget.remaining()) {
      warnings.push_back("cross-validation failed (max |z| = " + std::to_string(cv.max_abs_residual) +
                         ") with " + std::to_string(reps) + " replications per point; continuing");
      break;
    }
    std::vector<int> plan(data.size(), reps);
    budget.consumed += apply_plan(unit, data, plan);
    reps *= 2;
    ind = select_inducing(data, partition, inducing_options(cfg));
    model = AGLGPModel::fit_two_stage(data, partition, ind, model_options(cfg, cfg.fit_starts, 0), &model);
  }

  AcquisitionContext ctx;
  ctx.v = cfg.v;
  ctx.kappa_radius = ind.min_pairwise_distance;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : data.points) {
    lo = std::min(lo, p.sample_mean);
    hi = std::max(hi, p.sample_mean);
  }
  const double range = hi - lo;
  ctx.mean_lo = cfg.mean_lo.value_or(lo - 5.0 * range);
  ctx.mean_hi = cfg.mean_hi.value_or(hi + 5.0 * range);
  ctx.candidates = global_candidates(partition, cfg.candidate_count, stream(cfg.seed, kCandidates));
  for (Eigen::Index i = 0; i < ctx.candidates.rows(); ++i) {
    ctx.candidate_regions.push_back(partition.nearest_center(ctx.candidates.row(i).transpose()));
  }

  return CGLOState{cfg, unit, std::move(data), std::move(ind), std::move(model), std::move(ctx), budget, 0, 0,
                   std::move(warnings)};
}

GlobalStepResult global_step(const AGLGPModel& model, const AcquisitionContext& ctx, const Dataset& data) {
  const auto scores = kernels::score_gei(model, ctx, data);
  const std::size_t i = kernels::argmax(scores);
  GlobalStepResult r;
  r.candidate_index = i;
  r.x_g0 = ctx.candidates.row(to_index(i)).transpose();
  r.region = ctx.candidate_regions[i];
  r.gei_value = scores[i];
  return r;
}

std::size_t local_step(CGLOState& s, RegionId k, const VectorRef& x_g0) {
  std::size_t added = 0;
  while (!s.exhausted()) {
    const Matrix grid =
        region_grid(s.partition(), k, s.cfg.local_grid_size, mix_seed(stream(s.cfg.seed, kGrid), s.grid_draws++));
    if (grid.rows() == 0) {
      s.warnings.push_back("empty local grid in region " + std::to_string(k + 1));
      break;
    }
    const auto scores = kernels::score_mei(*s.model, s.ctx, k, grid);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::optional<Vector> pick;
    for (auto i : order) {
      const Vector x = grid.row(to_index(i)).transpose();
      if (min_distance_to_design(s.data, x) > 1e-9) {
        pick = x;
        break;
      }
    }
    if (!pick) break;

    const int reps = static_cast<int>(std::min<long long>(s.cfg.r_min, s.budget.remaining()));
    DesignPoint p;
    p.x = *pick;
    p.region = k;
    const auto r = s.objective.evaluate(p.x, reps);
    p.merge(r.count, r.sample_mean, r.sample_var);
    s.data.points.push_back(std::move(p));
    s.budget.consumed += r.count;
    ++added;
    ++s.points_since_refit;
    refresh_model(s, true);

    if (s.cfg.max_local_points > 0 && added >= s.cfg.max_local_points) break;
    if (s.partition().size() < 2) continue;
    const double g = gei(*s.model, s.ctx, s.data, x_g0);
    if (g <= switch_threshold(*s.model, s.ctx, s.data, k)) break;
  }
  return added;
}

AllocationOutcome allocation_step(CGLOState& s, RegionId k) {
  AllocationOutcome out;
  const auto topup = min_rep_topup(s.data, s.budget);
  out.b1 = apply_plan(s.objective, s.data, topup);
  s.budget.consumed += out.b1;

  if (!s.exhausted()) {
    const auto members = s.data.members(k);
    if (!members.empty()) {
      std::vector<OcbaEntry> entries;
      for (auto i : members) {
        const auto& p = s.data.points[i];
        entries.push_back({p.sample_mean, std::sqrt(p.sample_var), i});
      }
      const int b2 = static_cast<int>(std::min<long long>(s.budget.b2, s.budget.remaining()));
      const auto shares = ocba_allocate(entries, b2);
      std::vector<int> plan(s.data.size(), 0);
      for (std::size_t j = 0; j < members.size(); ++j) plan[members[j]] = shares[j];
      out.b2 = apply_plan(s.objective, s.data, plan);
      s.budget.consumed += out.b2;
    }
  }

  const int target = s.budget.min_reps(s.data.size());
  if (min_reps_of(s.data) < target && !s.exhausted()) {
    throw InvalidStateError("minimum replication rule violated: min reps " + std::to_string(min_reps_of(s.data)) +
                            " < " + std::to_string(target));
  }
  if (s.budget.consumed != s.data.total_reps()) throw InvalidStateError("budget ledger out of sync with dataset");
  refresh_model(s, false);
  return out;
}

RunResult run_cglo(const StochasticObjective& objective, const CGLOConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  CGLOState s = initialize(objective, cfg);

  RunResult result;
  auto push_row = [&](std::size_t iter, std::size_t region, std::size_t n_new, long long b1, long long b2,
                      const IterationDetail& detail) {
    TraceRow row;
    row.iter = iter;
    row.consumed = s.budget.consumed;
    row.region = region;
    row.n_new = n_new;
    row.b1 = b1;
    row.b2 = b2;
    std::tie(row.best_x, row.best_mean) = incumbent(objective, s.data);
    row.wall_ms = elapsed_ms(t0);
    result.trace.rows.push_back(std::move(row));
    result.trace.details.push_back(detail);
  };

  IterationDetail init_detail;
  init_detail.n_total = s.data.size();
  init_detail.min_reps = min_reps_of(s.data);
  push_row(0, 0, s.data.size(), 0, 0, init_detail);

  for (std::size_t iter = 1; !s.exhausted(); ++iter) {
    if (s.cfg.max_iterations > 0 && iter > s.cfg.max_iterations) break;
    const auto g = global_step(*s.model, s.ctx, s.data);
    const std::size_t n_new = local_step(s, g.region, g.x_g0);
    const auto alloc = allocation_step(s, g.region);

    IterationDetail detail;
    detail.n_total = s.data.size();
    detail.n_region = s.data.members(g.region).size();
    detail.gei_value = g.gei_value;
    detail.min_reps = min_reps_of(s.data);
    detail.min_reps_target = s.budget.min_reps(s.data.size());
    push_row(iter, g.region + 1, n_new, alloc.b1, alloc.b2, detail);
  }

  result.trace.warnings = s.warnings;
  std::tie(result.best_x, result.best_mean) = incumbent(objective, s.data);
  result.data = std::move(s.data);
  return result;
}

}  // namespace cglo
