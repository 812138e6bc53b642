#include "seqdf/study.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "seqdf/parallel.hpp"
#include "seqdf/rng.hpp"

namespace seqdf {

namespace fs = std::filesystem;

void StudySpec::validate() const {
  if (T < 10) throw std::invalid_argument("study horizon T must be at least 10");
  if (rho_list.empty() || beta_list.empty())
    throw std::invalid_argument("study needs nonempty rho and beta lists");
  for (double rho : rho_list)
    if (!(rho > -1.0 && rho <= 1.0))
      throw std::invalid_argument("study rho values must lie in (-1, 1]");
  if (!(kappa > 0.0 && kappa <= 0.5) ||
      !(kappa_t_hat > 0.0 && kappa_t_hat <= 0.5))
    throw std::invalid_argument("study kappas must lie in (0, 0.5]");
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth h must be > 0");
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("alpha must lie in (0, 0.5)");
  if (reps < 1) throw std::invalid_argument("study needs reps >= 1");
  if (charts.empty()) throw std::invalid_argument("study needs >= 1 chart");
  for (ChartId chart : charts)
    if (!chart_uses_curve(chart) && chart != ChartId::Z &&
        chart != ChartId::Z_t)
      throw std::invalid_argument(
          "study charts calibrate their own limits; " + to_string(chart) +
          " takes a user-supplied constant and cannot be studied here");
  if (calib_reps < 1000)
    throw std::invalid_argument("calibration needs calib_reps >= 1000");
  if (n_grid < 100) throw std::invalid_argument("calibration needs n_grid >= 100");
}

const CellResult* StudyResult::find(ChartId chart, double rho,
                                    double beta) const {
  for (const auto& cell : cells)
    if (cell.chart == chart && std::abs(cell.rho - rho) < 1e-12 &&
        std::abs(cell.beta - beta) < 1e-12)
      return &cell;
  return nullptr;
}

namespace {

std::string cache_key(double alpha, StatVariant variant,
                      const LimitSimConfig& cfg) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "curve_%s_a%g_k%g_z%g_%s_g%d_r%d_s%llu",
                to_string(variant).c_str(), alpha, cfg.kappa, cfg.zeta,
                cfg.kernel.name().c_str(), cfg.n_grid, cfg.reps,
                static_cast<unsigned long long>(cfg.seed));
  return buf;
}

bool curve_matches(const ControlLimitCurve& curve, double alpha,
                   StatVariant variant, const LimitSimConfig& cfg) {
  return curve.alpha == alpha && curve.variant == variant &&
         curve.kernel == cfg.kernel.id() &&
         std::abs(curve.kappa - cfg.kappa) < 1e-12 &&
         std::abs(curve.zeta - cfg.zeta) < 1e-12 &&
         curve.n_grid == cfg.n_grid && curve.reps == cfg.reps &&
         curve.seed == cfg.seed;
}

}  // namespace

ControlLimitCurve get_or_build_curve(double alpha, StatVariant variant,
                                     const LimitSimConfig& cfg,
                                     const std::string& cache_dir,
                                     bool* built) {
  if (built) *built = false;
  std::string path;
  if (!cache_dir.empty()) {
    fs::create_directories(cache_dir);
    path = (fs::path(cache_dir) / (cache_key(alpha, variant, cfg) + ".json"))
               .string();
    if (fs::exists(path)) {
      try {
        auto curve = load_curve(path);
        if (curve_matches(curve, alpha, variant, cfg)) return curve;
      } catch (const std::exception&) {
        // Corrupt or stale cache entry; rebuild below and overwrite.
      }
    }
  }
  auto curve = build_curve(alpha, variant, default_vartheta_grid(), cfg);
  if (!path.empty()) save_curve(curve, path);
  if (built) *built = true;
  return curve;
}

StudyResult run_study(const StudySpec& spec) {
  spec.validate();
  StudyResult out;
  out.spec = spec;

  const double zeta = static_cast<double>(spec.T) / spec.h;

  // Limit sources. Curve charts read the curve at the estimated ratio; the
  // constant-limit charts use the same curve family evaluated at ratio 1, so
  // every chart that shares (variant, kappa) also shares one calibration.
  LimitSimConfig base;
  base.n_grid = spec.n_grid;
  base.reps = spec.calib_reps;
  base.zeta = zeta;
  base.kernel = spec.kernel;
  base.seed = spec.seed;
  base.workers = spec.workers;

  std::map<ChartId, ControlLimitCurve> curves;
  std::map<ChartId, double> const_limits;
  for (ChartId chart : spec.charts) {
    LimitSimConfig sim = base;
    sim.kappa = chart == ChartId::S_hat_t ? spec.kappa_t_hat : spec.kappa;
    const StatVariant lv = chart_limit_variant(chart);
    auto curve = get_or_build_curve(spec.alpha, lv, sim, spec.curve_cache_dir);
    if (!chart_uses_curve(chart)) const_limits[chart] = curve.evaluate(1.0);
    curves.emplace(chart, std::move(curve));
  }
  for (const auto& [chart, curve] : curves) {
    (void)chart;
    out.curves_used.push_back(curve);
  }

  const std::size_t n_charts = spec.charts.size();
  std::vector<ChartConfig> cfgs(n_charts);
  std::vector<LimitSpec> limits(n_charts);
  for (std::size_t ci = 0; ci < n_charts; ++ci) {
    const ChartId chart = spec.charts[ci];
    ChartConfig cfg;
    cfg.T = spec.T;
    cfg.kappa = chart == ChartId::S_hat_t ? spec.kappa_t_hat : spec.kappa;
    cfg.h = spec.h;
    cfg.kernel = spec.kernel;
    cfg.alpha = spec.alpha;
    cfg.nw_squared_gamma = spec.nw_squared_gamma;
    cfg.validate();
    cfgs[ci] = cfg;
    if (chart_uses_curve(chart))
      limits[ci].curve = &curves.at(chart);
    else
      limits[ci].constant = const_limits.at(chart);
  }

  const std::size_t reps = static_cast<std::size_t>(spec.reps);
  std::size_t cell_index = 0;
  for (double rho : spec.rho_list) {
    for (double beta : spec.beta_list) {
      // One shared set of paths per cell: every chart scores the same data.
      std::vector<std::vector<ChartRunResult>> runs(
          n_charts, std::vector<ChartRunResult>(reps));
      parallel_for_reps(reps, spec.workers, [&](std::size_t rep) {
        GenSpec g;
        g.model = GenModel::arma11;
        g.rho = rho;
        g.beta = beta;
        g.T = spec.T;
        g.seed = rng::derive_subseed(
            spec.seed, static_cast<std::uint64_t>(cell_index) * reps + rep);
        const SeriesPath series = gen_arma11(g);
        ChartRunOptions options;
        options.keep_trajectory = false;
        for (std::size_t ci = 0; ci < n_charts; ++ci)
          runs[ci][rep] =
              run_chart(series, cfgs[ci], spec.charts[ci], limits[ci], options);
      });

      for (std::size_t ci = 0; ci < n_charts; ++ci) {
        CellResult cell;
        cell.chart = spec.charts[ci];
        cell.rho = rho;
        cell.beta = beta;
        cell.metrics =
            aggregate_study(runs[ci], cfgs[ci].monitor_start(), spec.T);
        const double p = cell.metrics.rejection_rate;
        cell.rate_std_error =
            std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
        cell.runs.reserve(reps);
        for (std::size_t rep = 0; rep < reps; ++rep) {
          RunRecord rec;
          rec.rep = static_cast<int>(rep);
          if (runs[ci][rep].signaled()) {
            rec.signal_time = *runs[ci][rep].signal_time;
            rec.delay = *runs[ci][rep].delay;
          }
          cell.runs.push_back(rec);
        }
        out.cells.push_back(std::move(cell));
      }
      ++cell_index;
    }
  }
  return out;
}

namespace {

std::string format_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string format_delay(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string rho_label(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rho);
  return buf;
}

void write_layout_table(const StudyResult& result,
                        const std::vector<ChartId>& charts,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open table file for writing: " + path);
  const auto& spec = result.spec;
  out << "chart,rho,metric";
  for (double beta : spec.beta_list) out << ",beta=" << rho_label(beta);
  out << "\n";
  for (ChartId chart : charts) {
    for (double rho : spec.rho_list) {
      out << to_string(chart) << "," << rho_label(rho) << ",rate";
      for (double beta : spec.beta_list) {
        const CellResult* cell = result.find(chart, rho, beta);
        out << "," << (cell ? format_rate(cell->metrics.rejection_rate) : "-");
      }
      out << "\n";
      if (rho == 1.0) continue;  // null rows report the false-signal rate only
      out << to_string(chart) << "," << rho_label(rho) << ",carl";
      for (double beta : spec.beta_list) {
        const CellResult* cell = result.find(chart, rho, beta);
        if (cell && cell->metrics.signals > 0)
          out << ",(" << format_delay(cell->metrics.carl) << ")";
        else
          out << ",-";
      }
      out << "\n";
      out << to_string(chart) << "," << rho_label(rho) << ",arl";
      for (double beta : spec.beta_list) {
        const CellResult* cell = result.find(chart, rho, beta);
        out << ","
            << (cell ? "[" + format_delay(cell->metrics.arl) + "]" : "-");
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed writing table file: " + path);
}

}  // namespace

void write_study_outputs(const StudyResult& result,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto& spec = result.spec;

  std::vector<ChartId> estimated, constant;
  for (ChartId chart : spec.charts)
    (chart_uses_curve(chart) ? estimated : constant).push_back(chart);
  if (!estimated.empty())
    write_layout_table(result, estimated,
                       (fs::path(out_dir) / "table_estimated_limits.csv").string());
  if (!constant.empty())
    write_layout_table(result, constant,
                       (fs::path(out_dir) / "table_constant_limits.csv").string());

  {
    std::ofstream out((fs::path(out_dir) / "study_long.csv").string());
    if (!out) throw std::runtime_error("cannot open study_long.csv for writing");
    out << "chart,rho,beta,reps,signals,rate,rate_se,carl,arl\n";
    char buf[256];
    for (const auto& cell : result.cells) {
      std::snprintf(buf, sizeof buf, "%s,%g,%g,%zu,%zu,%.6g,%.6g,",
                    to_string(cell.chart).c_str(), cell.rho, cell.beta,
                    cell.metrics.runs, cell.metrics.signals,
                    cell.metrics.rejection_rate, cell.rate_std_error);
      out << buf;
      if (cell.metrics.signals > 0) {
        std::snprintf(buf, sizeof buf, "%.6g", cell.metrics.carl);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, ",%.6g\n", cell.metrics.arl);
      out << buf;
    }
    if (!out) throw std::runtime_error("failed writing study_long.csv");
  }

  {
    std::ofstream out((fs::path(out_dir) / "run_records.ndjson").string());
    if (!out)
      throw std::runtime_error("cannot open run_records.ndjson for writing");
    for (const auto& cell : result.cells) {
      for (const auto& rec : cell.runs) {
        nlohmann::json j;
        j["chart"] = to_string(cell.chart);
        j["rho"] = cell.rho;
        j["beta"] = cell.beta;
        j["rep"] = rec.rep;
        if (rec.signal_time >= 0) {
          j["signal_time"] = rec.signal_time;
          j["delay"] = rec.delay;
        } else {
          j["signal_time"] = nullptr;
          j["delay"] = nullptr;
        }
        out << j.dump() << "\n";
      }
    }
    if (!out) throw std::runtime_error("failed writing run_records.ndjson");
  }

  // Signal-delay histograms for the curve-based coefficient chart under the
  // near-null alternatives (the detection-speed comparison).
  for (double rho : {0.9, 0.95}) {
    const CellResult* cell = result.find(ChartId::S_hat, rho, 0.0);
    if (!cell) continue;
    char name[64];
    std::snprintf(name, sizeof name, "delay_histogram_S-hat_rho%g.csv", rho);
    signal_histogram_export(cell->metrics,
                            (fs::path(out_dir) / name).string());
  }
}

}  // namespace seqdf
