#include "seqdf/charts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace seqdf {

ChartId parse_chart_id(const std::string& name) {
  if (name == "S-fixed") return ChartId::S_fixed;
  if (name == "S-hat") return ChartId::S_hat;
  if (name == "Z") return ChartId::Z;
  if (name == "S-t-fixed") return ChartId::S_t_fixed;
  if (name == "S-hat-t") return ChartId::S_hat_t;
  if (name == "Z-t") return ChartId::Z_t;
  throw std::invalid_argument(
      "unknown chart '" + name +
      "' (choices: S-fixed, S-hat, Z, S-t-fixed, S-hat-t, Z-t)");
}

std::string to_string(ChartId id) {
  switch (id) {
    case ChartId::S_fixed: return "S-fixed";
    case ChartId::S_hat: return "S-hat";
    case ChartId::Z: return "Z";
    case ChartId::S_t_fixed: return "S-t-fixed";
    case ChartId::S_hat_t: return "S-hat-t";
    case ChartId::Z_t: return "Z-t";
  }
  return "?";
}

StatVariant chart_statistic(ChartId id) {
  switch (id) {
    // The two answers to an unknown variance ratio: S-hat keeps the plain
    // statistic and moves the limit to the estimated ratio; Z transforms the
    // statistic so the ratio drops out of its limit and keeps a fixed limit.
    case ChartId::S_fixed: return StatVariant::D;
    case ChartId::S_hat: return StatVariant::D;
    case ChartId::Z: return StatVariant::E;
    case ChartId::S_t_fixed: return StatVariant::D_t_type;
    case ChartId::S_hat_t: return StatVariant::D_t_type;
    case ChartId::Z_t: return StatVariant::E_t_type;
  }
  return StatVariant::D;
}

StatVariant chart_limit_variant(ChartId id) {
  return is_t_type(chart_statistic(id)) ? StatVariant::D_t_type
                                        : StatVariant::D;
}

bool chart_uses_curve(ChartId id) {
  return id == ChartId::S_hat || id == ChartId::S_hat_t;
}

double default_kappa(ChartId id) {
  return id == ChartId::S_hat_t ? 0.3 : 0.2;
}

ChartRunResult run_chart(const SeriesPath& series, const ChartConfig& cfg,
                         ChartId chart, const LimitSpec& limit,
                         const ChartRunOptions& options) {
  const StatVariant variant = chart_statistic(chart);

  if (chart_uses_curve(chart)) {
    if (!limit.curve)
      throw std::invalid_argument("chart " + to_string(chart) +
                                  " reads its limit from a curve; none given");
    if (limit.constant)
      throw std::invalid_argument(
          "chart " + to_string(chart) +
          " reads its limit from a curve; drop the constant limit");
    limit.curve->validate();
    if (limit.curve->variant != chart_limit_variant(chart))
      throw std::invalid_argument(
          "curve was calibrated for statistic " +
          to_string(limit.curve->variant) + " but chart " + to_string(chart) +
          " needs " + to_string(chart_limit_variant(chart)));
    if (limit.curve->kernel != cfg.kernel.id())
      throw std::invalid_argument(
          "curve was calibrated for kernel " +
          Kernel(limit.curve->kernel).name() + " but the config uses " +
          cfg.kernel.name());
    if (std::abs(limit.curve->kappa - cfg.kappa) > 1e-9)
      throw std::invalid_argument(
          "curve was calibrated for a different monitoring start fraction");
    if (std::abs(limit.curve->zeta - cfg.zeta()) > 1e-9)
      throw std::invalid_argument(
          "curve was calibrated for a different zeta = T/h");
  } else {
    if (!limit.constant)
      throw std::invalid_argument("chart " + to_string(chart) +
                                  " needs a constant control limit");
    if (limit.curve)
      throw std::invalid_argument("chart " + to_string(chart) +
                                  " takes a constant limit, not a curve");
    if (!(*limit.constant < 0.0))
      throw std::invalid_argument(
          "constant control limit must be negative (one-sided lower chart)");
  }

  StatEvaluator ev(series, cfg);
  const int k = cfg.monitor_start();
  if (is_t_type(variant) && k < 3)
    throw std::invalid_argument(
        "t-type charts need a monitoring start of at least 3 "
        "(floor(T * kappa) >= 3)");
  if (ev.last_time() < k) {
    std::ostringstream os;
    os << "insufficient data: monitoring starts at t=" << k
       << " but the series only reaches t=" << ev.last_time();
    throw std::invalid_argument(os.str());
  }
  int t_last = options.t_end.value_or(ev.last_time());
  if (t_last > ev.last_time()) {
    std::ostringstream os;
    os << "t_end=" << t_last << " exceeds the last evaluable time "
       << ev.last_time();
    throw std::invalid_argument(os.str());
  }
  if (t_last < k)
    throw std::invalid_argument("t_end lies before the monitoring start");

  ChartRunResult res;
  res.chart = chart;
  res.k = k;
  res.trajectory.variant = variant;

  for (int t = k; t <= t_last; ++t) {
    double stat;
    NuisanceEstimate nu;
    const bool corrected = is_corrected(variant);
    if (corrected) {
      nu = ev.nuisance_at(t);
      stat = variant == StatVariant::E ? ev.corrected_at(t, nu)
                                       : ev.corrected_t_type_at(t, nu);
    } else {
      stat = ev.stat_at(t, variant);
    }

    double lim;
    if (chart_uses_curve(chart)) {
      if (!corrected) nu = ev.nuisance_at(t);
      bool clamped = false;
      lim = limit.curve->evaluate(nu.vartheta(), &clamped);
      if (clamped) ++res.clamp_warnings;
    } else {
      lim = *limit.constant;
    }

    if (options.keep_trajectory) {
      res.trajectory.times.push_back(t);
      res.trajectory.stats.push_back(stat);
      if (corrected || chart_uses_curve(chart))
        res.trajectory.nuisance.push_back(nu);
      res.limits_used.push_back(lim);
    }
    res.t_end = t;
    if (stat < lim) {
      res.signal_time = t;
      res.delay = t - k + 1;
      break;
    }
  }
  return res;
}

StudyMetrics aggregate_study(const std::vector<ChartRunResult>& runs, int k,
                             int T) {
  if (runs.empty())
    throw std::invalid_argument("aggregate_study needs at least one run");
  if (!(T >= k && k >= 1))
    throw std::invalid_argument("aggregate_study needs 1 <= k <= T");

  StudyMetrics m;
  m.k = k;
  m.T = T;
  m.runs = runs.size();
  const int horizon = T - k + 1;
  m.histogram.assign(static_cast<std::size_t>(horizon), 0);

  double delay_sum = 0.0;    // over signaling runs
  double run_length_sum = 0.0;  // censored at the horizon
  for (const auto& r : runs) {
    if (r.k != k)
      throw std::invalid_argument(
          "aggregate_study: runs have mixed monitoring starts");
    if (r.signaled()) {
      const int d = *r.delay;
      if (d < 1 || d > horizon)
        throw std::invalid_argument(
            "aggregate_study: delay outside 1..T-k+1");
      ++m.signals;
      delay_sum += d;
      run_length_sum += d;
      ++m.histogram[static_cast<std::size_t>(d) - 1];
    } else {
      run_length_sum += horizon;
    }
  }
  m.rejection_rate =
      static_cast<double>(m.signals) / static_cast<double>(m.runs);
  m.arl = run_length_sum / static_cast<double>(m.runs);
  m.carl = m.signals > 0 ? delay_sum / static_cast<double>(m.signals)
                         : std::nan("");
  return m;
}

void signal_histogram_export(const StudyMetrics& metrics,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open histogram file for writing: " + path);
  out << "delay,count,fraction\n";
  char buf[64];
  for (std::size_t i = 0; i < metrics.histogram.size(); ++i) {
    const std::size_t count = metrics.histogram[i];
    if (count == 0) continue;
    // Share of all monitored trajectories, not of signaling ones: the
    // early-detection comparison across alternatives needs the unconditional
    // scale.
    const double fraction =
        static_cast<double>(count) / static_cast<double>(metrics.runs);
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.10g\n", i + 1, count, fraction);
    out << buf;
  }
  if (!out) throw std::runtime_error("failed writing histogram file: " + path);
}

}  // namespace seqdf
