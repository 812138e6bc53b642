#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqdf/limits.hpp"
#include "seqdf/stats.hpp"

namespace seqdf {

// The six one-sided control charts. Each monitors one sequential statistic
// against a lower limit and signals stationarity on the first crossing.
// A chart handles the unknown variance ratio either by moving the limit to
// the estimated ratio (S_hat family) or by transforming the statistic so the
// ratio drops out of its limit (Z family) — never both.
//
//   S_fixed    statistic D,        user-supplied constant limit
//   S_hat      statistic D,        limit curve evaluated at vartheta_hat_t
//   Z          statistic E,        constant limit c(alpha, 1)
//   S_t_fixed  statistic D_t_type, user-supplied constant limit
//   S_hat_t    statistic D_t_type, limit curve evaluated at vartheta_hat_t
//   Z_t        statistic E_t_type, constant limit c(alpha, 1)
enum class ChartId { S_fixed, S_hat, Z, S_t_fixed, S_hat_t, Z_t };

ChartId parse_chart_id(const std::string& name);
std::string to_string(ChartId id);

// Statistic monitored by a chart.
StatVariant chart_statistic(ChartId id);

// Limit-law variant the chart's limits are calibrated from (D or D_t_type).
StatVariant chart_limit_variant(ChartId id);

// Whether the chart reads its limit from a curve at the estimated variance
// ratio (true) or uses a single constant (false).
bool chart_uses_curve(ChartId id);

// Monitoring start fraction used by the reference study: 0.3 for S_hat_t
// (its corrected statistic needs a longer startup sample), 0.2 otherwise.
double default_kappa(ChartId id);

// Where a chart's limit comes from. Exactly one member must be set,
// matching chart_uses_curve.
struct LimitSpec {
  std::optional<double> constant;
  const ControlLimitCurve* curve = nullptr;
};

struct ChartRunOptions {
  std::optional<int> t_end;       // stop scanning after this time (partial data)
  bool keep_trajectory = true;    // false: drop per-t storage (bulk studies)
};

struct ChartRunResult {
  ChartId chart = ChartId::S_fixed;
  int k = 0;                      // first monitored time
  int t_end = 0;                  // last time scanned (no signal up to here)
  std::optional<int> signal_time; // first t with stat < limit
  std::optional<int> delay;       // signal_time - k + 1
  StatTrajectory trajectory;      // over the scanned range (when kept)
  std::vector<double> limits_used;
  int clamp_warnings = 0;         // curve evaluations outside the knot range

  bool signaled() const { return signal_time.has_value(); }
};

// Runs one chart over t = k..min(T, t_end). The scan stops at the first
// crossing. Configuration errors (limit spec not matching the chart, a
// nonnegative constant limit, a curve calibrated for the wrong variant or
// kernel, series shorter than the scan) throw std::invalid_argument.
ChartRunResult run_chart(const SeriesPath& series, const ChartConfig& cfg,
                         ChartId chart, const LimitSpec& limit,
                         const ChartRunOptions& options = {});

// Aggregate performance of repeated runs with a common (k, T):
//   rejection_rate  fraction of runs that signaled
//   arl             average run length, censoring non-signaling runs at the
//                   horizon: mean of (delay if signaled else T - k + 1)
//   carl            mean delay conditional on signaling (NaN if none)
//   histogram       histogram[d-1] = number of runs with delay d
struct StudyMetrics {
  std::size_t runs = 0;
  std::size_t signals = 0;
  double rejection_rate = 0.0;
  double arl = 0.0;
  double carl = 0.0;
  std::vector<std::size_t> histogram;
  int k = 0;
  int T = 0;
};

StudyMetrics aggregate_study(const std::vector<ChartRunResult>& runs, int k,
                             int T);

// Writes "delay,count,fraction" rows for every delay with a nonzero count;
// just the header when nothing signaled. Fractions are shares of all
// monitored runs (not of the signaling ones), so histograms stay comparable
// across alternatives with different signal rates.
void signal_histogram_export(const StudyMetrics& metrics,
                             const std::string& path);

}  // namespace seqdf
