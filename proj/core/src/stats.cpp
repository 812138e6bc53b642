#include "seqdf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

namespace seqdf {

namespace {

// Neumaier-compensated accumulator. Prefix tables store get() after every
// step, so a stored prefix equals a fresh compensated loop bit for bit.
struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double get() const { return sum + comp; }
};

// Kernel weights on the lag grid: w[d] = K(d / h) for d = 0..dmax, where dmax
// stops at the kernel's support radius (in lag units) or at T - 1. prefix[d]
// accumulates w[0..d], so the kernel mass sum_{t'=1..t} K((t-t')/h) is
// prefix[min(t-1, dmax)].
struct KernelWeights {
  std::vector<double> w;
  std::vector<double> prefix;
};

KernelWeights make_kernel_weights(const Kernel& kernel, double h, int T) {
  int dmax = T - 1;
  if (kernel.compact_support()) {
    const double reach = kernel.support_radius() * h;
    if (reach < static_cast<double>(dmax))
      dmax = static_cast<int>(std::ceil(reach));
  }
  if (dmax < 0) dmax = 0;
  KernelWeights kw;
  kw.w.resize(static_cast<std::size_t>(dmax) + 1);
  kw.prefix.resize(kw.w.size());
  double acc = 0.0;
  for (int d = 0; d <= dmax; ++d) {
    kw.w[static_cast<std::size_t>(d)] = kernel(static_cast<double>(d) / h);
    acc += kw.w[static_cast<std::size_t>(d)];
    kw.prefix[static_cast<std::size_t>(d)] = acc;
  }
  return kw;
}

// sum_{d=0}^{min(t-1, dmax)} w[d] * x[t-d], summed in 256-wide plain blocks
// (vectorizable) combined with compensation across blocks.
double weighted_numerator(const std::vector<double>& x, const KernelWeights& kw,
                          int t) {
  const int dmax =
      std::min(t - 1, static_cast<int>(kw.w.size()) - 1);
  Neumaier total;
  int d = 0;
  while (d <= dmax) {
    const int end = std::min(d + 256, dmax + 1);
    double block = 0.0;
    for (int j = d; j < end; ++j)
      block += kw.w[static_cast<std::size_t>(j)] *
               x[static_cast<std::size_t>(t - j)];
    total.add(block);
    d = end;
  }
  return total.get();
}

std::vector<double> compensated_prefix(const std::vector<double>& terms) {
  // terms are indexed 1..T (slot 0 unused); prefix[t] = sum of terms[1..t].
  std::vector<double> prefix(terms.size());
  Neumaier acc;
  prefix[0] = 0.0;
  for (std::size_t t = 1; t < terms.size(); ++t) {
    acc.add(terms[t]);
    prefix[t] = acc.get();
  }
  return prefix;
}

}  // namespace

int ChartConfig::monitor_start() const {
  return static_cast<int>(std::floor(static_cast<double>(T) * kappa));
}

void ChartConfig::validate() const {
  if (T < 10) throw std::invalid_argument("horizon T must be at least 10");
  if (!(kappa > 0.0 && kappa <= 0.5))
    throw std::invalid_argument("kappa must lie in (0, 0.5]");
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth h must be > 0");
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("alpha must lie in (0, 0.5)");
  if (kernel.id() == KernelId::flat_test && !allow_flat_kernel)
    throw std::invalid_argument(
        "flat-test kernel is for oracle tests only; monitoring configs "
        "require an admissible kernel");
  if (monitor_start() < 2)
    throw std::invalid_argument(
        "monitoring start floor(T * kappa) must be at least 2");
  if (force_m && *force_m < 1)
    throw std::invalid_argument("force_m must be >= 1");
}

double NuisanceEstimate::vartheta() const { return std::sqrt(vartheta2); }
double NuisanceEstimate::eta() const { return std::sqrt(eta2 > 0 ? eta2 : 0); }
double NuisanceEstimate::sigma() const {
  return std::sqrt(sigma2 > 0 ? sigma2 : 0);
}

StatVariant parse_stat_variant(const std::string& name) {
  if (name == "D") return StatVariant::D;
  if (name == "D-t") return StatVariant::D_t_type;
  if (name == "E") return StatVariant::E;
  if (name == "E-t") return StatVariant::E_t_type;
  throw std::invalid_argument("unknown statistic '" + name +
                              "' (choices: D, D-t, E, E-t)");
}

std::string to_string(StatVariant variant) {
  switch (variant) {
    case StatVariant::D: return "D";
    case StatVariant::D_t_type: return "D-t";
    case StatVariant::E: return "E";
    case StatVariant::E_t_type: return "E-t";
  }
  return "?";
}

bool is_t_type(StatVariant variant) {
  return variant == StatVariant::D_t_type || variant == StatVariant::E_t_type;
}

bool is_corrected(StatVariant variant) {
  return variant == StatVariant::E || variant == StatVariant::E_t_type;
}

int default_lag_truncation(int t) {
  if (t < 1) throw std::out_of_range("lag truncation needs t >= 1");
  const int m = static_cast<int>(
      std::floor(4.0 * std::pow(static_cast<double>(t) / 100.0, 0.25)));
  return m < 1 ? 1 : m;
}

NuisanceEstimate newey_west(const std::vector<double>& diffs, int t, int m,
                            bool squared_gamma) {
  if (t < 2) throw std::out_of_range("long-run variance needs t >= 2");
  if (static_cast<int>(diffs.size()) < t)
    throw std::invalid_argument("difference sequence shorter than t");
  if (m < 1 || m >= t)
    throw std::out_of_range("lag truncation m must satisfy 1 <= m < t");

  NuisanceEstimate nu;
  nu.t = t;
  nu.m = m;

  Neumaier s2;
  for (int s = 1; s <= t; ++s) {
    const double d = diffs[static_cast<std::size_t>(s) - 1];
    s2.add(d * d);
  }
  nu.sigma2 = s2.get() / static_cast<double>(t);

  double eta2 = nu.sigma2;
  for (int i = 1; i <= m; ++i) {
    const double weight =
        static_cast<double>(m - i) / static_cast<double>(m);
    Neumaier g;
    for (int s = i + 1; s <= t; ++s)
      g.add(diffs[static_cast<std::size_t>(s) - 1] *
            diffs[static_cast<std::size_t>(s - i) - 1]);
    double gamma = g.get() / static_cast<double>(t);
    if (squared_gamma) gamma *= gamma;
    eta2 += 2.0 * weight * gamma;
  }

  if (nu.sigma2 == 0.0) {
    // Degenerate (constant) series: report the neutral ratio.
    nu.eta2 = 0.0;
    nu.vartheta2 = 1.0;
    return nu;
  }
  const double floor_value = 1e-8 * nu.sigma2;
  nu.eta2 = eta2 < floor_value ? floor_value : eta2;
  nu.vartheta2 = nu.eta2 / nu.sigma2;
  return nu;
}

// ---------------------------------------------------------------------------

struct StatEvaluator::Impl {
  ChartConfig cfg;
  int t_max = 0;  // last time with data: min(T, observations - 1)
  std::vector<double> diffs;  // dY_1..dY_{t_max} at [0..t_max-1]
  std::vector<double> x;      // x[t'] = Y_{t'-1} dY_{t'}, slot 0 unused
  std::vector<double> p_lag2;   // prefix of Y_{t'-1}^2
  std::vector<double> p_cross;  // prefix of Y_{t'-1} Y_{t'}
  std::vector<double> p_cur2;   // prefix of Y_{t'}^2
  KernelWeights kw;

  // A series shorter than T+1 is admitted: statistics are then available up
  // to the last observed time only (partial monitoring), while time stays
  // scaled by the configured horizon (s = t/T).
  Impl(const SeriesPath& series, const ChartConfig& config) : cfg(config) {
    cfg.validate();
    t_max = std::min(cfg.T, static_cast<int>(series.values.size()) - 1);
    const int T = t_max;
    const auto& y = series.values;
    diffs.assign(series.diffs.begin(),
                 series.diffs.begin() + static_cast<std::ptrdiff_t>(T));
    std::vector<double> lag2(static_cast<std::size_t>(T) + 1, 0.0);
    std::vector<double> cross(static_cast<std::size_t>(T) + 1, 0.0);
    std::vector<double> cur2(static_cast<std::size_t>(T) + 1, 0.0);
    x.assign(static_cast<std::size_t>(T) + 1, 0.0);
    for (int tp = 1; tp <= T; ++tp) {
      const double prev = y[static_cast<std::size_t>(tp) - 1];
      const double cur = y[static_cast<std::size_t>(tp)];
      lag2[static_cast<std::size_t>(tp)] = prev * prev;
      cross[static_cast<std::size_t>(tp)] = prev * cur;
      cur2[static_cast<std::size_t>(tp)] = cur * cur;
      x[static_cast<std::size_t>(tp)] = prev * diffs[static_cast<std::size_t>(tp) - 1];
    }
    p_lag2 = compensated_prefix(lag2);
    p_cross = compensated_prefix(cross);
    p_cur2 = compensated_prefix(cur2);
    kw = make_kernel_weights(cfg.kernel, cfg.h, T);
  }

  void check_t(int t, StatVariant variant) const {
    const int t_min = is_t_type(variant) ? 3 : (is_corrected(variant) ? 2 : 1);
    if (t < t_min || t > t_max) {
      std::ostringstream os;
      os << "time t=" << t << " outside the admissible range [" << t_min << ", "
         << t_max << "] for statistic " << to_string(variant)
         << (t_max < cfg.T ? " (series ends before the horizon)" : "");
      throw std::out_of_range(os.str());
    }
  }

  // t^-2 sum_{t'=1..t} Y_{t'-1}^2
  double den(int t) const {
    return p_lag2[static_cast<std::size_t>(t)] /
           (static_cast<double>(t) * static_cast<double>(t));
  }

  // sum_{t'=1..t} K((t-t')/h)
  double kernel_mass(int t) const {
    const int dmax = std::min(t - 1, static_cast<int>(kw.w.size()) - 1);
    return kw.prefix[static_cast<std::size_t>(dmax)];
  }

  double stat_D(int t) const {
    const double d = den(t);
    if (d == 0.0) return 0.0;
    const double num = weighted_numerator(x, kw, t) / static_cast<double>(t);
    return num / d;
  }

  // Least-squares AR(1) coefficient from the first t transitions.
  double rho_hat(int t) const {
    const double c = p_lag2[static_cast<std::size_t>(t)];
    if (c == 0.0) return 0.0;
    return p_cross[static_cast<std::size_t>(t)] / c;
  }

  // Residual variance s2_t = (t-1)^-1 sum (Y_t' - rho_hat Y_{t'-1})^2,
  // expanded through the prefix sums; clamped at 0 against cancellation.
  double resid_var(int t) const {
    const double rho = rho_hat(t);
    const double a = p_cur2[static_cast<std::size_t>(t)];
    const double b = p_cross[static_cast<std::size_t>(t)];
    const double c = p_lag2[static_cast<std::size_t>(t)];
    const double ssq = a - 2.0 * rho * b + rho * rho * c;
    return (ssq > 0.0 ? ssq : 0.0) / static_cast<double>(t - 1);
  }

  double stat_Dt(int t) const {
    const double d = den(t);
    if (d == 0.0) return 0.0;
    const double s2 = resid_var(t);
    if (s2 == 0.0) return 0.0;  // exact AR(1) fit: studentization degenerates
    // D / (t xi_t) with t xi_t = sqrt(s2 / den)
    return stat_D(t) / std::sqrt(s2 / d);
  }

  NuisanceEstimate nuisance(int t) const {
    const int m = cfg.force_m ? *cfg.force_m : default_lag_truncation(t);
    return newey_west(diffs, t, m, cfg.nw_squared_gamma);
  }

  double stat_E(int t, const NuisanceEstimate& nu) const {
    const double d = den(t);
    if (d == 0.0) return 0.0;
    const double correction =
        (nu.sigma2 - nu.eta2) / (2.0 * static_cast<double>(t)) * kernel_mass(t);
    return stat_D(t) + correction / d;
  }

  double stat_Et(int t, const NuisanceEstimate& nu) const {
    const double d = den(t);
    if (d == 0.0) return 0.0;
    const double s2 = resid_var(t);
    if (s2 == 0.0) return 0.0;
    const double eta = nu.eta();
    if (eta == 0.0) return 0.0;  // fully degenerate differences
    const double factor = std::sqrt(s2) / eta;
    const double correction = (nu.eta2 - nu.sigma2) /
                              (2.0 * static_cast<double>(t)) * kernel_mass(t) /
                              (eta * std::sqrt(d));
    return factor * stat_Dt(t) - correction;
  }

  double stat_at(int t, StatVariant variant) const {
    check_t(t, variant);
    switch (variant) {
      case StatVariant::D:
        return stat_D(t);
      case StatVariant::D_t_type:
        return stat_Dt(t);
      case StatVariant::E:
        return stat_E(t, nuisance(t));
      case StatVariant::E_t_type:
        return stat_Et(t, nuisance(t));
    }
    throw std::invalid_argument("unknown statistic variant");
  }
};

StatEvaluator::StatEvaluator(const SeriesPath& series, const ChartConfig& cfg)
    : impl_(std::make_unique<Impl>(series, cfg)) {}
StatEvaluator::~StatEvaluator() = default;
StatEvaluator::StatEvaluator(StatEvaluator&&) noexcept = default;
StatEvaluator& StatEvaluator::operator=(StatEvaluator&&) noexcept = default;

double StatEvaluator::stat_at(int t, StatVariant variant) const {
  return impl_->stat_at(t, variant);
}

NuisanceEstimate StatEvaluator::nuisance_at(int t) const {
  impl_->check_t(t, StatVariant::E);
  return impl_->nuisance(t);
}

double StatEvaluator::corrected_at(int t, const NuisanceEstimate& nu) const {
  impl_->check_t(t, StatVariant::E);
  return impl_->stat_E(t, nu);
}

double StatEvaluator::corrected_t_type_at(int t,
                                          const NuisanceEstimate& nu) const {
  impl_->check_t(t, StatVariant::E_t_type);
  return impl_->stat_Et(t, nu);
}

double StatEvaluator::resid_var_at(int t) const {
  impl_->check_t(t, StatVariant::D_t_type);
  return impl_->resid_var(t);
}

int StatEvaluator::last_time() const { return impl_->t_max; }

// ---------------------------------------------------------------------------

double df_stat(const SeriesPath& series, const ChartConfig& cfg, int t) {
  StatEvaluator ev(series, cfg);
  return ev.stat_at(t, StatVariant::D);
}

double df_t_stat(const SeriesPath& series, const ChartConfig& cfg, int t) {
  StatEvaluator ev(series, cfg);
  return ev.stat_at(t, StatVariant::D_t_type);
}

double transformed_stat_E(const SeriesPath& series, const ChartConfig& cfg,
                          int t, const NuisanceEstimate& nu) {
  StatEvaluator ev(series, cfg);
  return ev.corrected_at(t, nu);
}

double transformed_stat_E_tilde(const SeriesPath& series,
                                const ChartConfig& cfg, int t,
                                const NuisanceEstimate& nu) {
  StatEvaluator ev(series, cfg);
  return ev.corrected_t_type_at(t, nu);
}

double df_stat_flat_oracle(const SeriesPath& series, int t) {
  if (t < 1 || t >= static_cast<int>(series.values.size()))
    throw std::out_of_range("time t outside the series");
  long double cross = 0.0L, lag2 = 0.0L;
  for (int tp = 1; tp <= t; ++tp) {
    const long double prev = series.values[static_cast<std::size_t>(tp) - 1];
    const long double cur = series.values[static_cast<std::size_t>(tp)];
    cross += prev * cur;
    lag2 += prev * prev;
  }
  if (lag2 == 0.0L) return 0.0;
  const long double rho = cross / lag2;
  return static_cast<double>(static_cast<long double>(t) * (rho - 1.0L));
}

StatTrajectory trajectory(const SeriesPath& series, const ChartConfig& cfg,
                          StatVariant variant,
                          const TrajectoryOptions& options) {
  if (options.stride < 1)
    throw std::invalid_argument("trajectory stride must be >= 1");
  StatEvaluator ev(series, cfg);
  const int k = cfg.monitor_start();
  const int t_start = options.t_start.value_or(k);
  const int t_end = options.t_end.value_or(cfg.T);
  if (t_start > t_end)
    throw std::invalid_argument("trajectory start time exceeds end time");

  StatTrajectory out;
  out.variant = variant;
  const bool want_nuisance = options.include_nuisance || is_corrected(variant);
  for (int t = t_start; t <= t_end; t += options.stride) {
    out.times.push_back(t);
    out.stats.push_back(ev.stat_at(t, variant));
    if (want_nuisance) out.nuisance.push_back(ev.nuisance_at(t));
  }
  return out;
}

}  // namespace seqdf
