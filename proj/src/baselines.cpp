#include "cglo/baselines.hpp"

#include "cglo/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace cglo {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

TraceRow make_row(const StochasticObjective& original, const Dataset& data, std::size_t iter, long long consumed,
                  std::size_t n_new, long long b1, long long b2, std::chrono::steady_clock::time_point t0) {
  TraceRow row;
  row.iter = iter;
  row.consumed = consumed;
  row.n_new = n_new;
  row.b1 = b1;
  row.b2 = b2;
  std::tie(row.best_x, row.best_mean) = incumbent(original, data);
  row.wall_ms = elapsed_ms(t0);
  return row;
}

IterationDetail detail_of(const Dataset& data) {
  IterationDetail d;
  d.n_total = data.size();
  d.n_region = data.size();
  d.min_reps = data.points.empty() ? 0 : std::numeric_limits<int>::max();
  for (const auto& p : data.points) d.min_reps = std::min(d.min_reps, p.reps);
  return d;
}

}  // namespace

void RandomSearchConfig::validate() const {
  if (points < 1) throw ConfigError("rs: points must be >= 1");
  if (reps_per_point < 1) throw ConfigError("rs: reps_per_point must be >= 1");
  if (total_budget < reps_per_point) {
    throw ConfigError("rs: total_budget = " + std::to_string(total_budget) + " is below reps_per_point = " +
                      std::to_string(reps_per_point));
  }
}

RunResult random_search(const StochasticObjective& objective, const RandomSearchConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const StochasticObjective unit = objective.unit_view();
  Rng rng(mix_seed(cfg.seed, 11));
  const Matrix xs = uniform_sample(cfg.points, Box::unit(objective.dim()), rng);

  RunResult result;
  result.data.dim = objective.dim();
  result.data.bounds = Box::unit(objective.dim());
  long long consumed = 0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const long long left = cfg.total_budget - consumed;
    if (left <= 0) break;
    DesignPoint p;
    p.x = xs.row(i).transpose();
    const auto r = unit.evaluate(p.x, static_cast<int>(std::min<long long>(cfg.reps_per_point, left)));
    p.merge(r.count, r.sample_mean, r.sample_var);
    result.data.points.push_back(std::move(p));
    consumed += r.count;
    result.trace.rows.push_back(make_row(objective, result.data, static_cast<std::size_t>(i), consumed, 1, 0, 0, t0));
    result.trace.details.push_back(detail_of(result.data));
  }
  std::tie(result.best_x, result.best_mean) = incumbent(objective, result.data);
  return result;
}

GpEiConfig GpEiConfig::resolve(std::size_t dim) const {
  GpEiConfig c = *this;
  if (c.init_reps == 0) c.init_reps = c.r_min;
  if (c.b2 == 0) c.b2 = c.r_min;
  if (c.grid_size == 0) c.grid_size = 100 * dim;
  return c;
}

void GpEiConfig::validate(std::size_t dim) const {
  const GpEiConfig c = resolve(dim);
  if (c.n0 < 3) throw ConfigError("gp-ei-ocba: n0 must be >= 3 (got " + std::to_string(c.n0) + ")");
  if (c.r_min < 1 || c.init_reps < 1 || c.b2 < 1) throw ConfigError("gp-ei-ocba: r_min, init_reps and b2 must be >= 1");
  if (c.refit_every < 1 || c.fit_starts < 1 || c.refit_starts < 1) {
    throw ConfigError("gp-ei-ocba: refit_every, fit_starts and refit_starts must be >= 1");
  }
  const long long init = static_cast<long long>(c.n0) * c.init_reps;
  if (c.total_budget < init) {
    throw ConfigError("gp-ei-ocba: total_budget = " + std::to_string(c.total_budget) +
                      " is below n0*init_reps = " + std::to_string(init));
  }
}

RunResult gp_ei_optimize(const StochasticObjective& objective, const GpEiConfig& raw) {
  const std::size_t d = objective.dim();
  raw.validate(d);
  const GpEiConfig cfg = raw.resolve(d);
  const auto t0 = std::chrono::steady_clock::now();
  const StochasticObjective unit = objective.unit_view();
  const Box box = Box::unit(d);

  RunResult result;
  Dataset& data = result.data;
  data.dim = d;
  data.bounds = box;
  Rng rng(mix_seed(cfg.seed, 21));
  const Matrix x0 = latin_hypercube(cfg.n0, box, rng);
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    DesignPoint p;
    p.x = x0.row(i).transpose();
    const auto r = unit.evaluate(p.x, cfg.init_reps);
    p.merge(r.count, r.sample_mean, r.sample_var);
    data.points.push_back(std::move(p));
  }
  long long consumed = data.total_reps();
  result.trace.rows.push_back(make_row(objective, data, 0, consumed, data.size(), 0, 0, t0));
  result.trace.details.push_back(detail_of(data));

  auto fit = [&](std::size_t starts, const std::optional<GPHyperparams>& warm) {
    const GPData g{data.x(), data.y(), data.mean_noise_var()};
    FitOptions opt;
    opt.starts = static_cast<int>(starts);
    opt.seed = mix_seed(cfg.seed, 22 + data.size());
    opt.warm_start = warm;
    return fit_hyperparams(g, FullStructure{}, default_bounds(g, std::nullopt), std::nullopt, opt).hp;
  };
  GPHyperparams hp = fit(cfg.fit_starts, std::nullopt);
  std::size_t since_refit = 0;

  for (std::size_t iter = 1; consumed < cfg.total_budget; ++iter) {
    if (cfg.max_iterations > 0 && iter > cfg.max_iterations) break;
    if (since_refit >= cfg.refit_every) {
      hp = fit(cfg.refit_starts, hp);
      since_refit = 0;
    }
    const FullGP gp(GPData{data.x(), data.y(), data.mean_noise_var()}, hp);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : data.points) best = std::min(best, gp.predict(p.x).mean);

    const Matrix grid = latin_hypercube(cfg.grid_size, box, rng);
    std::optional<Vector> pick;
    double pick_ei = -1.0;
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      const Vector x = grid.row(i).transpose();
      bool dup = false;
      for (const auto& p : data.points) dup = dup || (p.x - x).norm() <= 1e-9;
      if (dup) continue;
      const auto pr = gp.predict(x);
      const double ei = ei_closed(best, pr.mean, std::sqrt(std::max(pr.variance, 0.0)));
      if (ei > pick_ei) {
        pick_ei = ei;
        pick = x;
      }
    }

    std::size_t n_new = 0;
    if (pick) {
      DesignPoint p;
      p.x = *pick;
      const auto r = unit.evaluate(p.x, static_cast<int>(std::min<long long>(cfg.r_min, cfg.total_budget - consumed)));
      p.merge(r.count, r.sample_mean, r.sample_var);
      data.points.push_back(std::move(p));
      consumed += r.count;
      n_new = 1;
      ++since_refit;
    }

    long long b2 = 0;
    if (consumed < cfg.total_budget) {
      std::vector<OcbaEntry> entries;
      for (std::size_t i = 0; i < data.size(); ++i) {
        entries.push_back({data.points[i].sample_mean, std::sqrt(data.points[i].sample_var), i});
      }
      const int budget = static_cast<int>(std::min<long long>(cfg.b2, cfg.total_budget - consumed));
      b2 = apply_plan(unit, data, ocba_allocate(entries, budget));
      consumed += b2;
    }
    result.trace.rows.push_back(make_row(objective, data, iter, consumed, n_new, 0, b2, t0));
    result.trace.details.push_back(detail_of(data));
  }
  std::tie(result.best_x, result.best_mean) = incumbent(objective, data);
  return result;
}

}  // namespace cglo
