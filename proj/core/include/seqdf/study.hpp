#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqdf/charts.hpp"

namespace seqdf {

// Full simulation study: ARMA(1,1) paths over a (rho, beta) grid, monitored
// by several charts, with control limits calibrated from the limit laws.
struct StudySpec {
  std::vector<double> rho_list{1.0, 0.98, 0.95, 0.9};
  std::vector<double> beta_list{-0.8, -0.5, 0.0, 0.5, 0.8};
  int T = 250;
  double h = 25.0;
  Kernel kernel{KernelId::gaussian};
  double alpha = 0.05;
  double kappa = 0.2;        // monitoring start for coefficient-type charts
  double kappa_t_hat = 0.3;  // start for the curve-based t-type chart
  int reps = 2000;
  std::uint64_t seed = 0;
  int workers = 0;
  bool nw_squared_gamma = false;
  std::vector<ChartId> charts{ChartId::S_hat, ChartId::S_hat_t, ChartId::Z,
                              ChartId::Z_t};

  // Limit calibration. Curves are cached in curve_cache_dir (when nonempty)
  // keyed by every calibration parameter; a cache miss triggers a build.
  int calib_reps = 20000;
  int n_grid = 1000;
  std::string curve_cache_dir;

  void validate() const;
};

// Compact per-run record kept for the NDJSON export.
struct RunRecord {
  int rep = 0;
  int signal_time = -1;  // -1 = no signal
  int delay = 0;         // 0 = no signal
};

// One (chart, rho, beta) cell of the study.
struct CellResult {
  ChartId chart = ChartId::S_hat;
  double rho = 1.0;
  double beta = 0.0;
  StudyMetrics metrics;
  double rate_std_error = 0.0;  // binomial MC error of the rejection rate
  std::vector<RunRecord> runs;
};

struct StudyResult {
  StudySpec spec;
  std::vector<CellResult> cells;
  std::vector<ControlLimitCurve> curves_used;

  const CellResult* find(ChartId chart, double rho, double beta) const;
};

// Runs the study. Replication r of cell (rho_i, beta_j) uses the sub-seed
// derived from (spec.seed, cell index * reps + r), and all charts score the
// same paths, so results are reproducible and chart-comparable by
// construction. Kappa differences only change where monitoring starts.
StudyResult run_study(const StudySpec& spec);

// Fetches a cached curve matching (alpha, variant, kernel, kappa, zeta,
// n_grid, reps, seed) or builds and caches it. Empty cache_dir disables
// caching. `built` (optional) reports whether a build happened.
ControlLimitCurve get_or_build_curve(double alpha, StatVariant variant,
                                     const LimitSimConfig& cfg,
                                     const std::string& cache_dir,
                                     bool* built = nullptr);

// Reference-layout outputs, written into out_dir:
//   table_estimated_limits.csv  charts with curve limits at the estimated
//                               ratio (rate, CARL in parentheses, ARL in
//                               brackets, one beta column per value)
//   table_constant_limits.csv   constant-limit charts, same layout
//   study_long.csv              one numeric row per cell (machine friendly)
//   run_records.ndjson          one record per chart run
//   delay_histogram_<chart>_rho<r>.csv
//                               signal-delay histograms for the curve-based
//                               coefficient chart at rho = 0.9 / 0.95
void write_study_outputs(const StudyResult& result, const std::string& out_dir);

}  // namespace seqdf
