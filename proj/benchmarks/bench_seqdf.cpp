// Microbenchmarks for the hot paths: series generation, the long-run
// variance estimate, full statistic trajectories, one limit-law replication,
// and a complete chart run.

#include <benchmark/benchmark.h>

#include <vector>

#include "seqdf/charts.hpp"
#include "seqdf/limits.hpp"
#include "seqdf/series.hpp"
#include "seqdf/stats.hpp"

namespace {

const seqdf::SeriesPath& walk250() {
  static const seqdf::SeriesPath path = [] {
    seqdf::GenSpec g;
    g.rho = 1.0;
    g.T = 250;
    g.seed = 42;
    return seqdf::gen_arma11(g);
  }();
  return path;
}

seqdf::ChartConfig chart_config() {
  seqdf::ChartConfig cfg;
  cfg.T = 250;
  cfg.kappa = 0.2;
  cfg.h = 25.0;
  return cfg;
}

const seqdf::ControlLimitCurve& small_curve() {
  static const seqdf::ControlLimitCurve curve = [] {
    seqdf::LimitSimConfig cfg;
    cfg.n_grid = 200;
    cfg.reps = 1000;
    cfg.seed = 9;
    const std::vector<double> grid{0.1, 0.5, 1.0, 1.5, 2.0};
    return seqdf::build_curve(0.05, seqdf::StatVariant::D, grid, cfg);
  }();
  return curve;
}

void BM_GenerateArma11(benchmark::State& state) {
  seqdf::GenSpec g;
  g.rho = 0.95;
  g.beta = 0.5;
  g.T = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    g.seed = ++seed;
    benchmark::DoNotOptimize(seqdf::gen_arma11(g));
  }
}
BENCHMARK(BM_GenerateArma11)->Arg(250)->Arg(2000);

void BM_NeweyWest(benchmark::State& state) {
  const auto& diffs = walk250().diffs;
  const int t = 250;
  const int m = seqdf::default_lag_truncation(t);
  for (auto _ : state)
    benchmark::DoNotOptimize(seqdf::newey_west(diffs, t, m));
}
BENCHMARK(BM_NeweyWest);

void BM_TrajectoryPlain(benchmark::State& state) {
  const auto cfg = chart_config();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        seqdf::trajectory(walk250(), cfg, seqdf::StatVariant::D));
}
BENCHMARK(BM_TrajectoryPlain);

void BM_TrajectoryCorrected(benchmark::State& state) {
  const auto cfg = chart_config();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        seqdf::trajectory(walk250(), cfg, seqdf::StatVariant::E_t_type));
}
BENCHMARK(BM_TrajectoryCorrected);

void BM_LimitReplication(benchmark::State& state) {
  seqdf::LimitSimConfig cfg;
  cfg.n_grid = static_cast<int>(state.range(0));
  cfg.seed = 7;
  std::uint64_t rep = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(seqdf::simulate_limit_inf(cfg, 1.0, rep++));
}
BENCHMARK(BM_LimitReplication)->Arg(1000);

void BM_ChartRun(benchmark::State& state) {
  const auto cfg = chart_config();
  seqdf::LimitSpec limit;
  limit.curve = &small_curve();
  seqdf::ChartRunOptions options;
  options.keep_trajectory = false;
  for (auto _ : state)
    benchmark::DoNotOptimize(seqdf::run_chart(walk250(), cfg,
                                              seqdf::ChartId::S_hat, limit,
                                              options));
}
BENCHMARK(BM_ChartRun);

}  // namespace

BENCHMARK_MAIN();
