#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqdf/kernel.hpp"
#include "seqdf/stats.hpp"

namespace seqdf {

// Monte Carlo discretization of the limit processes of the sequential
// statistics. A driver path (Brownian motion, or an Ornstein-Uhlenbeck
// process when a != 0) is simulated on an n_grid-point grid over [0, 1] and
// the limit functional is evaluated at every grid point s >= kappa.
struct LimitSimConfig {
  int n_grid = 1000;
  int reps = 20000;
  double kappa = 0.2;
  double zeta = 10.0;  // T / h carried into the limit
  Kernel kernel{KernelId::gaussian};
  double a = 0.0;      // OU drift; 0 = Brownian driver (the unit-root null)
  StatVariant variant = StatVariant::D;  // D or D_t_type
  std::uint64_t seed = 0;
  int workers = 0;     // 0 = default_workers()

  // Throws std::invalid_argument on: n_grid < 100, reps < 1000, kappa outside
  // (0, 0.5], zeta <= 0, kernel failing validation, variant not D/D_t_type,
  // or a != 0 combined with the t-type variant (that limit law is only
  // available for the coefficient statistic).
  void validate() const;
};

// One replication of the limit process, split into the parts of the
// functional that do and do not scale with the variance ratio vartheta:
//
//   D:        value(vartheta) = qv_part - vartheta^-2 * mass_part
//   D_t_type: value(vartheta) = vartheta * qv_part - vartheta^-1 * mass_part
//
// qv_part collects the terms driven by the path (quadratic variation and
// kernel-derivative convolution); mass_part is the kernel mass over the path
// variance and is nonnegative for admissible kernels. Evaluating one shared
// set of driver paths at many vartheta values (common random numbers) makes
// control limit curves smooth in vartheta.
struct LimitPathEval {
  StatVariant variant = StatVariant::D;
  int i_start = 0;  // first grid index monitored (s = i/n >= kappa)
  int n_grid = 0;
  std::vector<double> qv_part;
  std::vector<double> mass_part;

  double value(double vartheta, std::size_t idx) const;
  double infimum(double vartheta) const;
};

// Evaluates replication `rep_index` (seeded by derive_subseed(seed, rep)).
LimitPathEval simulate_limit_path(const LimitSimConfig& cfg,
                                  std::uint64_t rep_index);

// The discretized driver path of replication `rep_index`: n_grid + 1 values
// z_0 = 0, z_i = phi z_{i-1} + sig N_i with N_i from
// NormalSampler(derive_subseed(seed, rep_index)). With a == 0, phi = 1 and
// sig = sqrt(1/n) exactly, so the path is the plain Brownian partial-sum
// scheme bit for bit. Exposed for diagnostics and equivalence tests.
std::vector<double> simulate_driver_path(const LimitSimConfig& cfg,
                                         std::uint64_t rep_index);

// Infimum over the monitored grid of one replication at vartheta = 1 for the
// t-type variant / the configured ratio handled by the caller for D. Kept as
// a convenience wrapper around simulate_limit_path.
double simulate_limit_inf(const LimitSimConfig& cfg, double vartheta,
                          std::uint64_t rep_index);

// Per-replication infima for several vartheta values on shared driver paths:
// result[j][rep] is the infimum at varthetas[j] of replication rep. A
// replication whose functional evaluates non-finite is redrawn from a derived
// seed; if more than 0.1% of replications need redraws the run aborts with a
// simulation-quality error.
std::vector<std::vector<double>> simulate_limit_inf_matrix(
    const LimitSimConfig& cfg, std::span<const double> varthetas);

// Empirical p-quantile with linear interpolation between order statistics
// (the convention whose median of {1,2,3,4} is 2.5). Throws on empty input
// or p outside [0, 1].
double empirical_quantile(std::vector<double> sample, double p);

struct CalibrationResult {
  double c = 0.0;          // lower control limit, always < 0
  double std_error = 0.0;  // bootstrap standard error of the quantile
  int redrawn_paths = 0;
};

// Control limit c(alpha, vartheta): the alpha-quantile of the infimum of the
// limit process, estimated from cfg.reps replications, with a 200-resample
// bootstrap standard error. Throws a simulation-quality error if the
// estimated limit fails to be negative.
CalibrationResult calibrate_control_limit(double alpha, double vartheta,
                                          StatVariant variant,
                                          const LimitSimConfig& cfg);

struct CurveKnot {
  double vartheta = 0.0;
  double c = 0.0;
  double std_error = 0.0;
};

// Calibrated control limits on a vartheta grid, with the simulation
// parameters recorded so a cached curve can be matched to a request.
struct ControlLimitCurve {
  double alpha = 0.05;
  StatVariant variant = StatVariant::D;
  KernelId kernel = KernelId::gaussian;
  double kappa = 0.2;
  double zeta = 10.0;
  int n_grid = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<CurveKnot> knots;  // strictly increasing in vartheta

  // Piecewise-linear interpolation in vartheta. Outside the knot range the
  // curve clamps to the end knot and reports it through *clamped.
  double evaluate(double vartheta, bool* clamped = nullptr) const;

  // Structural checks: >= 2 knots, strictly increasing vartheta, all c < 0.
  void validate() const;
};

// Default calibration grid: 41 geometrically spaced ratios on [0.1, 2.0]
// plus 1.0 and the ratios of the reference simulation study, sorted and
// deduplicated. Dense enough that chord error of the piecewise-linear curve
// stays below each knot's Monte Carlo standard error.
std::vector<double> default_vartheta_grid();

// Builds a curve by evaluating every grid ratio on one shared set of driver
// paths. The grid must have at least 5 points and span [0.15, 1.5].
ControlLimitCurve build_curve(double alpha, StatVariant variant,
                              std::vector<double> vartheta_grid,
                              const LimitSimConfig& cfg);

// JSON (de)serialization. Doubles survive a round trip bit for bit.
std::string curve_to_json(const ControlLimitCurve& curve);
ControlLimitCurve curve_from_json(const std::string& text);
void save_curve(const ControlLimitCurve& curve, const std::string& path);
ControlLimitCurve load_curve(const std::string& path);

}  // namespace seqdf
