#include "cglo/kernels.hpp"
#include "cglo/sampling.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace cglo;

namespace {

struct Fixture {
  Dataset data;
  std::optional<AGLGPModel> model;
  AcquisitionContext ctx;
  Matrix grid;

  explicit Fixture(std::size_t n) {
    Rng rng(1);
    data.dim = 2;
    data.bounds = Box::unit(2);
    const Matrix x = latin_hypercube(n, data.bounds, rng);
    const auto p = build_partition(x, 5, 2, data.bounds);
    std::normal_distribution<double> z(0.0, 0.3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      DesignPoint d;
      d.x = x.row(i).transpose();
      d.reps = 10;
      d.sample_mean = std::sin(6.0 * d.x[0]) * std::cos(4.0 * d.x[1]) + z(rng);
      d.sample_var = 0.1;
      d.region = p.assign(d.x);
      data.points.push_back(d);
    }
    const auto ind = select_inducing(data, p, {});
    GPHyperparams g;
    g.variance = 1.0;
    g.lengthscales = Vector::Constant(2, 8.0);
    std::vector<GPHyperparams> local(5, g);
    for (auto& h : local) {
      h.mean = 0.0;
      h.variance = 0.2;
      h.lengthscales = Vector::Constant(2, 30.0);
    }
    model = AGLGPModel::assemble(data, p, ind, g, local);
    ctx.kappa_radius = ind.min_pairwise_distance;
    ctx.candidates = latin_hypercube(2000, data.bounds, rng);
    for (Eigen::Index i = 0; i < ctx.candidates.rows(); ++i)
      ctx.candidate_regions.push_back(p.nearest_center(ctx.candidates.row(i).transpose()));
    grid = region_grid_points(p, rng);
  }

  static Matrix region_grid_points(const Partition& p, Rng& rng) {
    const Matrix raw = latin_hypercube(4000, p.bounding_box(0), rng);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
      if (p.nearest_center(raw.row(i).transpose()) == 0) keep.push_back(i);
    Matrix out(static_cast<Eigen::Index>(keep.size()), 2);
    for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = raw.row(keep[i]);
    return out;
  }
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

void BM_gei_serial(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::score_gei(*f.model, f.ctx, f.data));
}
void BM_gei_parallel(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::score_gei(*f.model, f.ctx, f.data));
}
void BM_mei_serial(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::score_mei(*f.model, f.ctx, 0, f.grid));
}
void BM_mei_parallel(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::score_mei(*f.model, f.ctx, 0, f.grid));
}
void BM_predict_serial(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::predict_overall(*f.model, f.ctx.candidates));
}
void BM_predict_parallel(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::parallel::predict_overall(*f.model, f.ctx.candidates));
}

}  // namespace

BENCHMARK(BM_gei_serial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gei_parallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mei_serial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mei_parallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict_serial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict_parallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
