#include "app.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqdf/charts.hpp"
#include "seqdf/kernel.hpp"
#include "seqdf/limits.hpp"
#include "seqdf/series.hpp"
#include "seqdf/study.hpp"

namespace seqdf::cli {

namespace {

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = item.find_last_not_of(" \t");
    const std::string body = item.substr(begin, end - begin + 1);
    char* stop = nullptr;
    const double v = std::strtod(body.c_str(), &stop);
    if (stop != body.c_str() + body.size())
      throw std::invalid_argument(what + ": not a number: '" + body + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(what + ": empty list");
  return out;
}

std::vector<ChartId> parse_chart_list(const std::string& text) {
  std::vector<ChartId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = item.find_last_not_of(" \t");
    out.push_back(parse_chart_id(item.substr(begin, end - begin + 1)));
  }
  if (out.empty()) throw std::invalid_argument("chart list is empty");
  return out;
}

GenModel parse_model(const std::string& name) {
  if (name == "arma11") return GenModel::arma11;
  if (name == "local-to-unity") return GenModel::local_to_unity;
  if (name == "arch1") return GenModel::arch1_innovations;
  throw std::invalid_argument(
      "unknown model '" + name +
      "' (choices: arma11, local-to-unity, arch1)");
}

int cmd_calibrate(const Options& opt) {
  LimitSimConfig cfg;
  cfg.n_grid = opt.cal.n_grid;
  cfg.reps = opt.cal.reps;
  cfg.kappa = opt.cal.kappa;
  cfg.zeta = opt.cal.zeta;
  cfg.kernel = Kernel::parse(opt.cal.kernel);
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;
  const StatVariant variant = parse_stat_variant(opt.cal.variant);
  if (variant != StatVariant::D && variant != StatVariant::D_t_type)
    throw std::invalid_argument(
        "calibration variant must be D or D-t (the corrected statistics "
        "share their limit laws)");

  if (opt.cal.single_vartheta) {
    const auto res = calibrate_control_limit(opt.cal.alpha,
                                             *opt.cal.single_vartheta, variant,
                                             cfg);
    std::printf("vartheta=%.6g c=%.6f stderr=%.6f redrawn=%d\n",
                *opt.cal.single_vartheta, res.c, res.std_error,
                res.redrawn_paths);
    if (!opt.cal.out.empty()) {
      nlohmann::json j;
      j["alpha"] = opt.cal.alpha;
      j["variant"] = to_string(variant);
      j["vartheta"] = *opt.cal.single_vartheta;
      j["c"] = res.c;
      j["std_error"] = res.std_error;
      std::ofstream f(opt.cal.out);
      if (!f) throw std::runtime_error("cannot open " + opt.cal.out);
      f << j.dump(2) << "\n";
    }
    return 0;
  }

  if (opt.cal.out.empty())
    throw std::invalid_argument(
        "calibrate needs --out FILE for the curve (or --single-vartheta)");
  std::vector<double> grid =
      opt.cal.vartheta_grid.empty()
          ? default_vartheta_grid()
          : parse_double_list(opt.cal.vartheta_grid, "--vartheta-grid");
  const auto curve = build_curve(opt.cal.alpha, variant, grid, cfg);
  save_curve(curve, opt.cal.out);
  std::printf("# control limit curve: variant=%s alpha=%g kappa=%g zeta=%g "
              "kernel=%s n_grid=%d reps=%d seed=%llu\n",
              to_string(curve.variant).c_str(), curve.alpha, curve.kappa,
              curve.zeta, Kernel(curve.kernel).name().c_str(), curve.n_grid,
              curve.reps, static_cast<unsigned long long>(curve.seed));
  for (const auto& k : curve.knots)
    std::printf("vartheta=%.6g c=%.6f stderr=%.6f\n", k.vartheta, k.c,
                k.std_error);
  std::printf("wrote %s\n", opt.cal.out.c_str());
  return 0;
}

int cmd_monitor(const Options& opt) {
  if (opt.mon.input.empty())
    throw std::invalid_argument("monitor needs --input FILE");
  const ChartId chart = parse_chart_id(opt.mon.chart);

  ChartConfig cfg;
  cfg.T = opt.mon.T;
  cfg.kappa = opt.mon.kappa.value_or(default_kappa(chart));
  cfg.h = opt.mon.h;
  cfg.kernel = Kernel::parse(opt.mon.kernel);
  cfg.alpha = opt.mon.alpha;
  cfg.nw_squared_gamma = opt.mon.nw_squared_gamma;
  cfg.validate();

  const SeriesPath series =
      ingest_series(opt.mon.input, parse_series_format(opt.mon.format));

  ControlLimitCurve curve;
  LimitSpec limit;
  if (chart_uses_curve(chart)) {
    if (opt.mon.curve.empty())
      throw std::invalid_argument("chart " + to_string(chart) +
                                  " needs --curve FILE");
    if (opt.mon.limit)
      throw std::invalid_argument("chart " + to_string(chart) +
                                  " takes --curve, not --limit");
    curve = load_curve(opt.mon.curve);
    limit.curve = &curve;
  } else if (opt.mon.limit) {
    if (!opt.mon.curve.empty())
      throw std::invalid_argument("give --limit or --curve, not both");
    limit.constant = *opt.mon.limit;
  } else if (!opt.mon.curve.empty()) {
    // Constant-limit chart fed from a calibrated curve: use its value at the
    // neutral ratio 1, after the same compatibility checks a curve chart runs.
    if (chart == ChartId::S_fixed || chart == ChartId::S_t_fixed)
      throw std::invalid_argument("chart " + to_string(chart) +
                                  " needs an explicit --limit");
    curve = load_curve(opt.mon.curve);
    curve.validate();
    if (curve.variant != chart_limit_variant(chart))
      throw std::invalid_argument("curve was calibrated for statistic " +
                                  to_string(curve.variant) + " but chart " +
                                  to_string(chart) + " needs " +
                                  to_string(chart_limit_variant(chart)));
    if (curve.kernel != cfg.kernel.id())
      throw std::invalid_argument("curve kernel does not match --kernel");
    if (std::abs(curve.kappa - cfg.kappa) > 1e-9 ||
        std::abs(curve.zeta - cfg.zeta()) > 1e-9)
      throw std::invalid_argument(
          "curve was calibrated for different kappa or zeta = T/h");
    limit.constant = curve.evaluate(1.0);
  } else {
    throw std::invalid_argument("chart " + to_string(chart) +
                                " needs --limit C or --curve FILE");
  }

  const auto res = run_chart(series, cfg, chart, limit);

  for (std::size_t i = 0; i < res.trajectory.times.size(); ++i) {
    std::printf("t=%d stat=%.6f limit=%.6f", res.trajectory.times[i],
                res.trajectory.stats[i], res.limits_used[i]);
    if (i < res.trajectory.nuisance.size())
      std::printf(" vartheta=%.4f", res.trajectory.nuisance[i].vartheta());
    std::printf("\n");
  }
  if (res.signaled())
    std::printf("signal at t=%d (delay %d of %d monitored times)\n",
                *res.signal_time, *res.delay, res.t_end - res.k + 1);
  else
    std::printf("no signal through t=%d\n", res.t_end);
  if (res.clamp_warnings > 0)
    std::fprintf(stderr,
                 "warning: %d curve evaluations outside the calibrated "
                 "vartheta range (clamped to the end knot)\n",
                 res.clamp_warnings);

  if (!opt.mon.report.empty()) {
    nlohmann::json j;
    j["chart"] = to_string(chart);
    j["T"] = cfg.T;
    j["kappa"] = cfg.kappa;
    j["k"] = res.k;
    j["t_end"] = res.t_end;
    j["clamp_warnings"] = res.clamp_warnings;
    if (res.signaled()) {
      j["signal_time"] = *res.signal_time;
      j["delay"] = *res.delay;
    } else {
      j["signal_time"] = nullptr;
      j["delay"] = nullptr;
    }
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < res.trajectory.times.size(); ++i) {
      nlohmann::json row;
      row["t"] = res.trajectory.times[i];
      row["stat"] = res.trajectory.stats[i];
      row["limit"] = res.limits_used[i];
      if (i < res.trajectory.nuisance.size())
        row["vartheta"] = res.trajectory.nuisance[i].vartheta();
      rows.push_back(std::move(row));
    }
    j["trajectory"] = std::move(rows);
    std::ofstream f(opt.mon.report);
    if (!f) throw std::runtime_error("cannot open " + opt.mon.report);
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("failed writing " + opt.mon.report);
  }
  return 0;
}

int cmd_simulate(const Options& opt) {
  if (opt.sim.out.empty())
    throw std::invalid_argument("simulate needs --out FILE");
  GenSpec g;
  g.model = parse_model(opt.sim.model);
  g.rho = opt.sim.rho;
  g.beta = opt.sim.beta;
  g.a = opt.sim.a;
  g.T = opt.sim.T;
  g.seed = opt.seed;
  g.arch_a0 = opt.sim.arch_a0;
  g.arch_b1 = opt.sim.arch_b1;
  const SeriesPath series = generate(g);
  write_series(series, opt.sim.out, parse_series_format(opt.sim.format));
  std::printf("wrote %d observations to %s (model=%s seed=%llu)\n",
              series.horizon() + 1, opt.sim.out.c_str(),
              opt.sim.model.c_str(),
              static_cast<unsigned long long>(opt.seed));
  return 0;
}

int cmd_reproduce(const Options& opt) {
  if (opt.rep.out_dir.empty())
    throw std::invalid_argument("reproduce-tables needs --out-dir DIR");
  StudySpec spec;
  spec.rho_list = parse_double_list(opt.rep.rho_list, "--rho-list");
  spec.beta_list = parse_double_list(opt.rep.beta_list, "--beta-list");
  spec.T = opt.rep.T;
  spec.h = opt.rep.h;
  spec.alpha = opt.rep.alpha;
  spec.kappa = opt.rep.kappa;
  spec.kappa_t_hat = opt.rep.kappa_t_hat;
  spec.reps = opt.rep.reps;
  spec.seed = opt.seed;
  spec.workers = opt.workers;
  spec.nw_squared_gamma = opt.rep.nw_squared_gamma;
  spec.charts = parse_chart_list(opt.rep.charts);
  spec.calib_reps = opt.rep.calib_reps;
  spec.n_grid = opt.rep.n_grid;
  if (!opt.rep.no_cache)
    spec.curve_cache_dir =
        opt.rep.curve_cache.empty()
            ? (std::filesystem::path(opt.rep.out_dir) / "curves").string()
            : opt.rep.curve_cache;

  const StudyResult result = run_study(spec);
  write_study_outputs(result, opt.rep.out_dir);

  for (const auto& curve : result.curves_used)
    std::printf("curve: variant=%s kappa=%g -> c(alpha, 1) = %.4f\n",
                to_string(curve.variant).c_str(), curve.kappa,
                curve.evaluate(1.0));
  for (const auto& cell : result.cells)
    std::printf("%s rho=%g beta=%g: rate=%.3f (se %.3f) carl=%.1f arl=%.1f\n",
                to_string(cell.chart).c_str(), cell.rho, cell.beta,
                cell.metrics.rejection_rate, cell.rate_std_error,
                cell.metrics.carl, cell.metrics.arl);
  std::printf("wrote study outputs to %s\n", opt.rep.out_dir.c_str());
  return 0;
}

int cmd_validate_kernel(const Options& opt) {
  const Kernel kernel = Kernel::parse(opt.vk.kernel);
  const KernelValidation v = validate_kernel(kernel);
  std::printf("%s: %s\n", kernel.name().c_str(), v.summary().c_str());
  return v.passed() ? 0 : 1;
}

}  // namespace

std::unique_ptr<CLI::App> build_app(Options& opt) {
  auto app = std::make_unique<CLI::App>(
      "Sequential unit-root monitoring: kernel-weighted Dickey-Fuller "
      "statistics, limit-law calibration, control charts");
  app->set_config("--config", "", "Read options from a TOML/INI file");
  app->require_subcommand(0, 1);
  app->fallthrough();

  app->add_option("--seed", opt.seed, "Master RNG seed")
      ->capture_default_str();
  app->add_option("--workers", opt.workers,
                  "Worker threads (0 = hardware default)")
      ->capture_default_str();

  auto* cal = app->add_subcommand(
      "calibrate", "Calibrate control limits from the limit law");
  cal->fallthrough();
  cal->add_option("--alpha", opt.cal.alpha, "False-signal level")
      ->capture_default_str();
  cal->add_option("--variant", opt.cal.variant, "Statistic: D or D-t")
      ->capture_default_str();
  cal->add_option("--kappa", opt.cal.kappa, "Monitoring start fraction")
      ->capture_default_str();
  cal->add_option("--zeta", opt.cal.zeta, "T/h carried into the limit")
      ->capture_default_str();
  cal->add_option("--kernel", opt.cal.kernel, "Weighting kernel")
      ->capture_default_str();
  cal->add_option("--n-grid", opt.cal.n_grid, "Grid points on [0,1]")
      ->capture_default_str();
  cal->add_option("--reps", opt.cal.reps, "Monte Carlo replications")
      ->capture_default_str();
  cal->add_option("--vartheta-grid", opt.cal.vartheta_grid,
                  "Comma-separated curve knots (default: built-in grid)");
  cal->add_option("--single-vartheta", opt.cal.single_vartheta,
                  "Calibrate one constant instead of a curve");
  cal->add_option("--out", opt.cal.out, "Output curve JSON file");

  auto* mon = app->add_subcommand("monitor", "Run a control chart on a series");
  mon->fallthrough();
  mon->add_option("--input", opt.mon.input, "Series file");
  mon->add_option("--format", opt.mon.format, "csv or ndjson")
      ->capture_default_str();
  mon->add_option("--chart", opt.mon.chart,
                  "S-fixed, S-hat, Z, S-t-fixed, S-hat-t, Z-t")
      ->capture_default_str();
  mon->add_option("--T", opt.mon.T, "Monitoring horizon")
      ->capture_default_str();
  mon->add_option("--kappa", opt.mon.kappa,
                  "Monitoring start fraction (default: chart-specific)");
  mon->add_option("--bandwidth", opt.mon.h, "Kernel bandwidth h")->capture_default_str();
  mon->add_option("--kernel", opt.mon.kernel, "Weighting kernel")
      ->capture_default_str();
  mon->add_option("--alpha", opt.mon.alpha, "False-signal level")
      ->capture_default_str();
  mon->add_option("--limit", opt.mon.limit, "Constant control limit (< 0)");
  mon->add_option("--curve", opt.mon.curve, "Control limit curve JSON");
  mon->add_flag("--nw-squared-gamma", opt.mon.nw_squared_gamma,
                "Square the autocovariances in the long-run variance");
  mon->add_option("--report", opt.mon.report, "Write a JSON run report");

  auto* sim = app->add_subcommand("simulate", "Generate a series");
  sim->fallthrough();
  sim->add_option("--model", opt.sim.model,
                  "arma11, local-to-unity, or arch1")
      ->capture_default_str();
  sim->add_option("--rho", opt.sim.rho, "AR coefficient")
      ->capture_default_str();
  sim->add_option("--beta", opt.sim.beta, "MA coefficient")
      ->capture_default_str();
  sim->add_option("--a", opt.sim.a, "Local-to-unity drift (rho = 1 + a/T)")
      ->capture_default_str();
  sim->add_option("--T", opt.sim.T, "Horizon")->capture_default_str();
  sim->add_option("--arch-a0", opt.sim.arch_a0, "ARCH baseline variance")
      ->capture_default_str();
  sim->add_option("--arch-b1", opt.sim.arch_b1, "ARCH feedback")
      ->capture_default_str();
  sim->add_option("--out", opt.sim.out, "Output file");
  sim->add_option("--format", opt.sim.format, "csv or ndjson")
      ->capture_default_str();

  auto* rep = app->add_subcommand(
      "reproduce-tables", "Run the reference simulation study");
  rep->fallthrough();
  rep->add_option("--out-dir", opt.rep.out_dir, "Output directory");
  rep->add_option("--reps", opt.rep.reps, "Paths per (rho, beta) cell")
      ->capture_default_str();
  rep->add_option("--calib-reps", opt.rep.calib_reps,
                  "Limit-law replications for calibration")
      ->capture_default_str();
  rep->add_option("--n-grid", opt.rep.n_grid, "Limit-law grid points")
      ->capture_default_str();
  rep->add_option("--T", opt.rep.T, "Horizon")->capture_default_str();
  rep->add_option("--bandwidth", opt.rep.h, "Kernel bandwidth h")->capture_default_str();
  rep->add_option("--alpha", opt.rep.alpha, "False-signal level")
      ->capture_default_str();
  rep->add_option("--kappa", opt.rep.kappa, "Start fraction (most charts)")
      ->capture_default_str();
  rep->add_option("--kappa-t-hat", opt.rep.kappa_t_hat,
                  "Start fraction for the curve-based t-type chart")
      ->capture_default_str();
  rep->add_option("--rho-list", opt.rep.rho_list, "AR coefficients")
      ->capture_default_str();
  rep->add_option("--beta-list", opt.rep.beta_list, "MA coefficients")
      ->capture_default_str();
  rep->add_option("--charts", opt.rep.charts, "Charts to run")
      ->capture_default_str();
  rep->add_option("--curve-cache", opt.rep.curve_cache,
                  "Curve cache directory (default: <out-dir>/curves)");
  rep->add_flag("--no-cache", opt.rep.no_cache, "Disable the curve cache");
  rep->add_flag("--nw-squared-gamma", opt.rep.nw_squared_gamma,
                "Square the autocovariances in the long-run variance");

  auto* vk = app->add_subcommand("validate-kernel",
                                 "Check kernel admissibility conditions");
  vk->fallthrough();
  vk->add_option("--kernel", opt.vk.kernel, "Kernel to check")
      ->capture_default_str();

  return app;
}

int dispatch(const Options& opt, const CLI::App& app) {
  try {
    if (app.got_subcommand("calibrate")) return cmd_calibrate(opt);
    if (app.got_subcommand("monitor")) return cmd_monitor(opt);
    if (app.got_subcommand("simulate")) return cmd_simulate(opt);
    if (app.got_subcommand("reproduce-tables")) return cmd_reproduce(opt);
    if (app.got_subcommand("validate-kernel")) return cmd_validate_kernel(opt);
    std::fprintf(stderr, "%s", app.help().c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run(int argc, const char* const* argv) {
  Options opt;
  auto app = build_app(opt);
  try {
    app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app->exit(e);
  }
  return dispatch(opt, *app);
}

}  // namespace seqdf::cli
