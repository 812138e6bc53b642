#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqdf/kernel.hpp"
#include "seqdf/series.hpp"

namespace seqdf {

// Configuration shared by the sequential statistics and the control charts.
// Monitoring runs over t = k..T with start index k = floor(T * kappa).
struct ChartConfig {
  int T = 250;
  double kappa = 0.2;
  double h = 25.0;  // kernel bandwidth, in observations
  Kernel kernel{KernelId::gaussian};
  double alpha = 0.05;

  // Testing hooks. allow_flat_kernel admits the flat-test kernel (production
  // configs reject it: the weighted statistics then lose their locality and
  // the calibrated limits do not apply). force_m pins the long-run variance
  // lag truncation instead of the default t-dependent rule.
  bool allow_flat_kernel = false;
  std::optional<int> force_m;

  // Uses squared autocovariances inside the long-run variance estimate (a
  // printed variant of the usual formula, kept for comparison runs; see
  // newey_west). Production default is the standard unsquared form.
  bool nw_squared_gamma = false;

  int monitor_start() const;  // k = floor(T * kappa)
  double zeta() const { return static_cast<double>(T) / h; }

  // Throws std::invalid_argument on bad ranges: T < 10, kappa outside
  // (0, 0.5], h <= 0, alpha outside (0, 0.5), flat kernel without the hook,
  // or monitor_start() < 2 (< 3 is checked later for t-type statistics).
  void validate() const;
};

// Long-run / short-run variance estimates from the first t differences.
struct NuisanceEstimate {
  int t = 0;
  double sigma2 = 0.0;     // short-run variance: mean of dY_s^2, s = 1..t
  double eta2 = 0.0;       // long-run variance (Bartlett weights), floored
  double vartheta2 = 1.0;  // ratio eta2 / sigma2; 1 for a degenerate series
  int m = 0;               // lag truncation actually used

  double vartheta() const;
  double eta() const;
  double sigma() const;
};

// The four sequential statistics:
//  D         kernel-weighted Dickey-Fuller coefficient statistic
//  D_t_type  its studentized (t-statistic) form
//  E         D plus the correction that removes the dependence of the limit
//            law on the variance ratio
//  E_t_type  the corrected form of the studentized statistic
enum class StatVariant { D, D_t_type, E, E_t_type };

StatVariant parse_stat_variant(const std::string& name);
std::string to_string(StatVariant variant);
bool is_t_type(StatVariant variant);
bool is_corrected(StatVariant variant);

// A statistic evaluated along t = times[i], stats[i] = value at s = t/T.
// nuisance is aligned with times when it was requested (or required by the
// corrected variants); otherwise empty.
struct StatTrajectory {
  StatVariant variant = StatVariant::D;
  std::vector<int> times;
  std::vector<double> stats;
  std::vector<NuisanceEstimate> nuisance;
};

// Default lag truncation for the long-run variance: max(1, floor(4 * (t/100)^(1/4))).
int default_lag_truncation(int t);

// Bartlett-weighted long-run variance estimate from diffs[0..t-1] with lag
// truncation m (1 <= m < t):
//   sigma2 = t^-1 sum_{s=1..t} dY_s^2
//   gamma(i) = t^-1 sum_{s=i+1..t} dY_s dY_{s-i}
//   eta2 = sigma2 + 2 sum_{i=1..m} (m-i)/m * gamma(i)
// eta2 is floored at 1e-8 * sigma2 to keep downstream ratios positive. When
// sigma2 == 0 (degenerate constant series) the estimate reports the neutral
// ratio vartheta2 = 1. squared_gamma replaces gamma(i) by gamma(i)^2 — the
// printed-variant form, reachable from configs for comparison only.
NuisanceEstimate newey_west(const std::vector<double>& diffs, int t, int m,
                            bool squared_gamma = false);

// Sequential statistics at monitoring time t (that is, at s = t/T):
//
//   D(t) = [t^-1 sum_{t'=1..t} Y_{t'-1} dY_{t'} K((t-t')/h)]
//          / [t^-2 sum_{t'=1..t} Y_{t'-1}^2],          0/0 = 0
//
//   E(t) = D(t) + [(sigma2 - eta2)/(2t) * sum_{t'=1..t} K((t-t')/h)]
//          / [t^-2 sum Y_{t'-1}^2]
//
//   D_t_type(t) = D(t) / (t * xi_t)  with
//     t * xi_t = sqrt(s2_t / (t^-2 sum Y_{t'-1}^2)),
//     s2_t = (t-1)^-1 sum_{t'=1..t} (Y_{t'} - rho_t Y_{t'-1})^2,
//     rho_t the least-squares AR(1) coefficient; requires t >= 3
//
//   E_t_type(t) = (s_t / eta_t) D_t_type(t)
//          - (eta2 - sigma2)/(2t) * sum K / (eta_t * sqrt(t^-2 sum Y^2))
//
// All four return 0 when the path is identically zero up to t.
double df_stat(const SeriesPath& series, const ChartConfig& cfg, int t);
double df_t_stat(const SeriesPath& series, const ChartConfig& cfg, int t);
double transformed_stat_E(const SeriesPath& series, const ChartConfig& cfg,
                          int t, const NuisanceEstimate& nu);
double transformed_stat_E_tilde(const SeriesPath& series,
                                const ChartConfig& cfg, int t,
                                const NuisanceEstimate& nu);

// Classical (unweighted) coefficient statistic t * (rho_t - 1). With the
// flat-test kernel every kernel weight is 1, so df_stat must reproduce this
// value exactly; the oracle is computed from plain least squares with no
// shared code.
double df_stat_flat_oracle(const SeriesPath& series, int t);

struct TrajectoryOptions {
  int stride = 1;
  bool include_nuisance = false;
  std::optional<int> t_start;  // defaults to cfg.monitor_start()
  std::optional<int> t_end;    // defaults to cfg.T
};

// Evaluates one statistic along the monitoring range. Each time point is
// computed from scratch (same arithmetic as the per-time entry points above,
// bit for bit), with the kernel weight table shared across time points.
StatTrajectory trajectory(const SeriesPath& series, const ChartConfig& cfg,
                          StatVariant variant,
                          const TrajectoryOptions& options = {});

// Incremental evaluator used by trajectory() and by the control charts: owns
// the prefix sums and kernel weight table for one (series, config) pair and
// evaluates any statistic at any admissible t. Evaluations are independent,
// so a chart can stop scanning early without computing the tail.
class StatEvaluator {
 public:
  StatEvaluator(const SeriesPath& series, const ChartConfig& cfg);
  ~StatEvaluator();
  StatEvaluator(StatEvaluator&&) noexcept;
  StatEvaluator& operator=(StatEvaluator&&) noexcept;

  // Statistic at time t. For the corrected variants the nuisance estimate is
  // computed internally (honoring force_m); nuisance_at returns the same
  // estimate for reporting.
  double stat_at(int t, StatVariant variant) const;
  NuisanceEstimate nuisance_at(int t) const;

  // Corrected statistics with an externally supplied nuisance estimate
  // (stat_at uses nuisance_at(t); these exist for injection).
  double corrected_at(int t, const NuisanceEstimate& nu) const;
  double corrected_t_type_at(int t, const NuisanceEstimate& nu) const;

  // Residual variance s2_t of the least-squares AR(1) fit through time t
  // (the studentization scale of the t-type statistics); t >= 3.
  double resid_var_at(int t) const;

  // Last evaluable time: min(cfg.T, observations - 1). A series shorter than
  // T+1 is admitted; statistics then stop at the end of the data while time
  // stays scaled by the configured horizon.
  int last_time() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace seqdf
