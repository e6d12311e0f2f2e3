// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit code 1
// if any criterion fails. Seeds below are fixed and never tuned.

#include "cglo/acquisition.hpp"
#include "cglo/harness.hpp"
#include "cglo/kernels.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace cglo;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;
std::set<int> selected;  // empty: all

void report(int id, const std::function<Outcome()>& body) {
  if (!selected.empty() && !selected.count(id)) return;
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string num(double v, int prec = 3) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", prec, v);
  return b;
}

// ---------------------------------------------------------------- criterion 1

Outcome oracle_equivalence() {
  double worst_pred = 0.0, worst_full = 0.0, worst_wood = 0.0;
  int instances = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const std::size_t d = 1 + s % 3;
    const std::size_t n = 4 + s % 7;
    const std::size_t m = 1 + s % 5;
    const std::size_t k = 1 + s % 2;
    const auto inst = oracle::random_instance(1000 + s, n, m, d, k);
    const auto model = inst.model();
    const oracle::Dense dense(inst.problem());
    std::mt19937_64 rng(s);
    for (int t = 0; t < 5; ++t) {
      const Vector x0 = oracle::random_point(rng, d);
      const auto g = model.predict_global(x0);
      const auto l = model.predict_local(x0);
      worst_pred = std::max({worst_pred, oracle::rel_err(g.mean, dense.global_mean(x0)),
                             oracle::rel_err(g.variance, dense.global_var(x0)),
                             oracle::rel_err(l.mean, dense.local_mean(x0)),
                             oracle::rel_err(l.variance, dense.local_var(x0))});
      worst_wood = std::max({worst_wood, oracle::rel_err(dense.one_stage_mean(x0, false), g.mean),
                             oracle::rel_err(dense.one_stage_var(x0, false), g.variance)});
    }
    ++instances;

    const auto full = oracle::random_instance(5000 + s, n, 0, d, k, true);
    const auto fm = full.model();
    for (int t = 0; t < 5; ++t) {
      const Vector x0 = oracle::random_point(rng, d);
      const auto g = fm.predict_global(x0);
      const auto [mm, vv] =
          oracle::full_gp(full.data.x(), full.data.y(), full.data.mean_noise_var(), full.global, x0);
      worst_full = std::max({worst_full, oracle::rel_err(g.mean, mm), oracle::rel_err(g.variance, vv)});
    }
  }
  Outcome o;
  o.pass = instances >= 50 && worst_pred <= 1e-8 && worst_full <= 1e-6 && worst_wood <= 1e-8;
  o.detail = std::to_string(instances) + " instances; max rel err predictors " + num(worst_pred) +
             " (tol 1e-8), inducing=design vs full GP " + num(worst_full) + " (tol 1e-6), one-stage L=0 vs global " +
             num(worst_wood) + " (tol 1e-8)";
  return o;
}

// ---------------------------------------------------------------- criterion 2

// |closed - mc| within 3 standard errors. When no draw improved (far tail)
// the sample standard error is 0, and the exact one of the estimator,
// sqrt(Var[I] / N) from the second moment of the improvement, is used instead.
double exact_se(double best, double mean, double sd, std::size_t draws) {
  if (sd <= 0.0) return 0.0;
  const double d = best - mean;
  const double z = d / sd;
  const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double m1 = d * cdf + sd * phi;
  const double m2 = (d * d + sd * sd) * cdf + d * sd * phi;
  return std::sqrt(std::max(m2 - m1 * m1, 0.0) / static_cast<double>(draws));
}

bool within(double closed, std::pair<double, double> mc, double se_if_degenerate, double& worst_z) {
  if (mc.second == 0.0) mc.second = se_if_degenerate;
  const double diff = std::abs(closed - mc.first);
  if (mc.second > 0.0) worst_z = std::max(worst_z, diff / mc.second);
  return diff <= 3.0 * mc.second;
}

Outcome acquisition() {
  constexpr std::size_t draws = 100000;
  int bad = 0;
  double worst_z = 0.0;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t mei_zero_checks = 0;
  bool mei_zero = true;
  for (std::uint64_t c = 0; c < 20; ++c) {
    // plain EI
    const double best = 2.0 * u(rng) - 1.0;
    const double mean = 2.0 * u(rng) - 1.0;
    const double sd = 0.05 + u(rng);
    if (!within(ei_closed(best, mean, sd), oracle::mc_ei(best, mean, sd, draws, 10 * c + 1),
                exact_se(best, mean, sd, draws), worst_z))
      ++bad;

    const std::size_t d = 1 + c % 2;
    const auto inst = oracle::random_instance(300 + c, 10, 3, d, 2);
    const auto model = inst.model();
    const oracle::Dense dense(inst.problem());
    AcquisitionContext ctx;
    ctx.kappa_radius = 0.1 + 0.3 * u(rng);
    ctx.v = 0.5 + u(rng);

    // gEI at a random point, against dense moments and a brute-force penalty
    const Vector x = oracle::random_point(rng, d);
    double inc = 1e300;
    for (Eigen::Index i = 0; i < inst.inducing.points.rows(); ++i)
      inc = std::min(inc, dense.global_mean(inst.inducing.points.row(i).transpose()));
    const std::size_t kx = oracle::nearest(inst.partition->centers(), x);
    std::size_t na = 0;
    for (const auto& p : inst.data.points)
      if (oracle::nearest(inst.partition->centers(), p.x) == kx && (p.x - x).norm() < ctx.kappa_radius) ++na;
    const double pen = 1.0 / (1.0 + std::exp(static_cast<double>(na) / ctx.v - 5.0));
    const double gm = dense.global_mean(x);
    const double gs = std::sqrt(std::max(dense.global_var(x), 0.0));
    auto g = oracle::mc_ei(inc, gm, gs, draws, 10 * c + 2);
    g.first *= pen;
    g.second *= pen;
    if (!within(gei(model, ctx, inst.data, x), g, pen * exact_se(inc, gm, gs, draws), worst_z)) ++bad;

    // mEI at a random point of its region
    double linc = 1e300;
    for (const auto& p : inst.data.points)
      if (p.region == kx) linc = std::min(linc, dense.global_mean(p.x) + dense.local_mean(p.x));
    if (linc < 1e300) {
      const double zm = dense.global_mean(x) + dense.local_mean(x);
      const double zs = std::sqrt(std::max(dense.local_spatial_var(x, kx), 0.0));
      if (!within(mei(model, ctx, kx, x), oracle::mc_ei(linc, zm, zs, draws, 10 * c + 3), exact_se(linc, zm, zs, draws),
                  worst_z))
        ++bad;
      for (const auto& p : inst.data.points) {
        if (p.region != kx) continue;
        ++mei_zero_checks;
        if (mei(model, ctx, kx, p.x) != 0.0) mei_zero = false;
      }
    }
  }

  bool half = true;
  for (double v : {1.0, 2.0, 3.0, 4.0, 0.2}) half = half && density_penalty(static_cast<std::size_t>(std::lround(5 * v)), v) == 0.5;

  Outcome o;
  o.pass = bad == 0 && half && mei_zero && mei_zero_checks > 0;
  o.detail = "20 configurations x (EI, gEI, mEI) vs 1e5-draw Monte Carlo: " + std::to_string(bad) +
             " outside 3 SE (max |z| " + num(worst_z) + "); penalty at n_a = 5v " + (half ? "== 0.5" : "!= 0.5") +
             "; mEI at " + std::to_string(mei_zero_checks) + " sampled points " + (mei_zero ? "all 0" : "NOT all 0");
  return o;
}

// ---------------------------------------------------------------- criterion 3

Outcome ocba() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool sums = true;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 11;
    std::vector<OcbaEntry> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({10.0 * u(rng), 0.1 + 3.0 * u(rng), i});
    const int b2 = 5 + static_cast<int>(200 * u(rng));
    const auto plan = ocba_allocate(e, b2);
    const auto want = oracle::ocba_continuous(e, b2);
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += plan[i];
      worst = std::max(worst, std::abs(plan[i] - want[i]));
    }
    sums = sums && total == b2;
  }
  Outcome o;
  o.pass = sums && worst <= 1.0;
  o.detail = std::string("20 instances; plans ") + (sums ? "sum to B2" : "DO NOT sum to B2") +
             "; max |integer - direct ratio allocation| = " + num(worst) + " (tol 1)";
  return o;
}

// ---------------------------------------------------------- criteria 4 and 5

std::vector<RunResult> one_d_runs;

CGLOConfig one_d_config(std::uint64_t seed) {
  CGLOConfig c;
  c.n0 = 12;
  c.regions = 3;
  c.r_min = 20;
  c.b2 = 20;
  c.kappa_coef = 0.1;
  c.max_iterations = 15;
  c.total_budget = 20000;
  c.seed = seed;
  return c;
}

Outcome min_replications() {
  // allocation_step throws on a violation, so finishing the runs is the in-run assertion;
  // the recorded details are re-checked here as well.
  std::size_t steps = 0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    one_d_runs.push_back(run_cglo(make_1d_paper(seed), one_d_config(seed)));
    const auto& r = one_d_runs.back();
    for (std::size_t i = 1; i < r.trace.rows.size(); ++i) {
      const auto& det = r.trace.details[i];
      const int target = static_cast<int>(std::ceil(0.1 * static_cast<double>(det.n_total) - 1e-9));
      ok = ok && det.min_reps >= target && det.min_reps_target == target;
      ++steps;
    }
  }
  Outcome o;
  o.pass = ok && steps > 0;
  o.detail = std::to_string(steps) + " allocation steps over 10 seeds; min M_t(x) >= ceil(0.1 N_t) " +
             (ok ? "held after every step" : "VIOLATED");
  return o;
}

Outcome one_d_reproduction() {
  if (one_d_runs.size() != 10) throw std::runtime_error("1D runs missing");
  const double opt = -10.1316;
  std::vector<double> errs;
  for (const auto& r : one_d_runs) {
    const TraceRow* at = nullptr;
    for (const auto& row : r.trace.rows)
      if (row.iter <= 15) at = &row;
    errs.push_back(std::abs(at->best_mean - opt) / std::abs(opt));
  }
  std::vector<double> sorted = errs;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[4] + sorted[5]);
  std::string all;
  for (double e : errs) all += " " + num(100.0 * e, 2) + "%";
  Outcome o;
  o.pass = median < 0.05;
  o.detail = "relative error at iteration 15, median over 10 seeds = " + num(100.0 * median) + "% (tol 5%); per seed:" + all;
  return o;
}

// ---------------------------------------------------------------- criterion 6

Outcome two_d_reproduction() {
  ExperimentSpec spec;
  spec.objective = "sun2d";
  spec.optimizers = {"cglo", "rs", "gp-ei-ocba"};
  spec.macroreps = 10;
  spec.checkpoints = {5000};
  spec.budget = 5000;
  spec.master_seed = 9000;
  spec.cglo.n0 = 40;
  spec.cglo.regions = 5;
  spec.cglo.init_reps = 20;
  spec.cglo.r_min = 10;
  spec.cglo.b2 = 10;
  spec.cglo.max_local_points = 3;
  spec.gp.n0 = 40;
  spec.gp.init_reps = 20;
  spec.gp.r_min = 10;
  spec.gp.b2 = 10;
  const auto res = run_experiment(spec, false);
  auto find = [&](const std::string& name) {
    for (const auto& s : res.summary)
      if (s.optimizer == name) return s;
    throw std::runtime_error("missing summary for " + name);
  };
  auto true_gap = [&](const std::string& name) {
    double s = 0.0;
    int n = 0;
    for (const auto& r : res.reps)
      if (r.optimizer == name && r.complete) {
        s += r.dy_true;
        ++n;
      }
    return n ? s / n : 0.0;
  };
  const auto c = find("cglo");
  const auto rs = find("rs");
  const auto gp = find("gp-ei-ocba");
  Outcome o;
  o.pass = c.count == 10 && rs.count == 10 && c.mean_dy <= 0.6 && c.mean_dx <= 5.0 && c.mean_dy < rs.mean_dy;
  o.detail = "cglo mean |dy| " + num(c.mean_dy) + " (tol 0.6), mean |dx| " + num(c.mean_dx) + " (tol 5); rs mean |dy| " +
             num(rs.mean_dy) + " (cglo must be lower); gp-ei-ocba |dy| " + num(gp.mean_dy) + " |dx| " +
             num(gp.mean_dx) + " (reference only); noise-free gap at the incumbent: cglo " + num(true_gap("cglo")) +
             ", rs " + num(true_gap("rs")) + ", gp-ei-ocba " + num(true_gap("gp-ei-ocba"));
  return o;
}

// ---------------------------------------------------------------- criterion 7

std::string trace_without_wall(const RunTrace& t, std::size_t dim) {
  std::ostringstream raw;
  write_trace_csv(raw, t, dim);
  std::istringstream in(raw.str());
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Outcome determinism() {
  bool same = true;
  const auto a = run_cglo(make_1d_paper(42), one_d_config(42));
  const auto b = run_cglo(make_1d_paper(42), one_d_config(42));
  same = same && trace_without_wall(a.trace, 1) == trace_without_wall(b.trace, 1);

  ExperimentSpec spec;
  spec.objective = "sun2d";
  spec.optimizers = {"cglo", "rs", "gp-ei-ocba"};
  spec.macroreps = 2;
  spec.checkpoints = {1200};
  spec.master_seed = 5;
  spec.cglo.n0 = 40;
  spec.cglo.init_reps = 20;
  spec.cglo.r_min = 10;
  spec.gp.n0 = 40;
  spec.gp.init_reps = 20;
  spec.gp.r_min = 10;
  const auto r1 = run_experiment(spec, false);
  const auto r2 = run_experiment(spec, false);
  std::ostringstream s1, s2;
  write_summary_csv(s1, r1.summary);
  write_summary_csv(s2, r2.summary);
  same = same && s1.str() == s2.str();
  for (std::size_t i = 0; i < r1.traces.size(); ++i)
    for (std::size_t m = 0; m < r1.traces[i].size(); ++m)
      same = same && trace_without_wall(r1.traces[i][m], 2) == trace_without_wall(r2.traces[i][m], 2);
  Outcome o;
  o.pass = same;
  o.detail = same ? "repeated 1D run and 2D three-optimizer experiment reproduce traces and summary exactly"
                  : "repeated runs DIFFER";
  return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome properties() {
  std::size_t probes = 0, lhs_sets = 0, merges = 0, logistic = 0;
  bool ok = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const std::size_t d = 1 + s % 3;
    const Box box = Box::unit(d);
    const Matrix pts = latin_hypercube(12 + s, box, rng);
    const auto p = build_partition(pts, 2 + s % 5, s, box);
    const Matrix c = p.centers();
    const Matrix probe = uniform_sample(2000, box, rng);
    for (Eigen::Index i = 0; i < probe.rows(); ++i, ++probes)
      ok = ok && p.assign(probe.row(i).transpose()) == oracle::nearest(c, probe.row(i).transpose());
  }
  for (std::uint64_t s = 0; s < 50; ++s, ++lhs_sets) {
    Rng rng(100 + s);
    const std::size_t n = 2 + s;
    const std::size_t d = 1 + s % 4;
    const Matrix x = latin_hypercube(n, Box::unit(d), rng);
    for (std::size_t j = 0; j < d; ++j) {
      std::set<long> strata;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        strata.insert(static_cast<long>(std::floor(x(i, static_cast<Eigen::Index>(j)) * static_cast<double>(n))));
      ok = ok && strata.size() == n;
    }
  }
  {
    const auto obj = make_1d_paper(3);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t, ++merges) {
      const Vector x = Vector::Constant(1, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
      DesignPoint dp;
      dp.x = x;
      int used = 0;
      for (int b = 0; b < 4; ++b) {
        const int cnt = 1 + (t + b) % 5;
        const auto r = obj.evaluate(x, cnt, used);
        dp.merge(r.count, r.sample_mean, r.sample_var);
        used += cnt;
      }
      double mean = 0.0;
      for (int i = 0; i < used; ++i) mean += obj.draw(x, i);
      mean /= used;
      double var = 0.0;
      for (int i = 0; i < used; ++i) var += (obj.draw(x, i) - mean) * (obj.draw(x, i) - mean);
      var /= used - 1;
      ok = ok && dp.reps == used && std::abs(dp.sample_mean - mean) <= 1e-12 * std::max(1.0, std::abs(mean)) &&
           std::abs(dp.sample_var - var) <= 1e-10 * std::max(1.0, var);
    }
  }
  for (int i = 1; i < 10000; ++i, ++logistic) {
    const double p = i / 10000.0;
    ok = ok && std::abs(inverse_logistic_transform(logistic_transform(p)) - p) <= 1e-12;
  }
  Outcome o;
  o.pass = ok;
  o.detail = std::to_string(probes) + " partition probes, " + std::to_string(lhs_sets) + " LHS designs, " +
             std::to_string(merges) + " streaming merges, " + std::to_string(logistic) + " logistic round trips: " +
             (ok ? "all hold" : "FAILURES");
  return o;
}

}  // namespace

// Optional arguments restrict the run to the listed criteria (criterion 5 needs 4).
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  std::printf("kernel threads: %d\n", kernels::max_threads());
  report(1, oracle_equivalence);
  report(2, acquisition);
  report(3, ocba);
  report(4, min_replications);
  report(5, one_d_reproduction);
  report(6, two_d_reproduction);
  report(7, determinism);
  report(8, properties);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
