#include "seqdf/limits.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "seqdf/parallel.hpp"
#include "seqdf/rng.hpp"

namespace seqdf {

void LimitSimConfig::validate() const {
  if (n_grid < 100)
    throw std::invalid_argument("limit simulation needs n_grid >= 100");
  if (reps < 1000)
    throw std::invalid_argument("limit simulation needs reps >= 1000");
  if (!(kappa > 0.0 && kappa <= 0.5))
    throw std::invalid_argument("kappa must lie in (0, 0.5]");
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be > 0");
  if (variant != StatVariant::D && variant != StatVariant::D_t_type)
    throw std::invalid_argument(
        "limit laws exist for the D and D-t statistics only (the corrected "
        "statistics share them)");
  if (a != 0.0 && variant == StatVariant::D_t_type)
    throw std::invalid_argument(
        "the local-to-unity limit is available for the coefficient statistic "
        "only");
  if (!std::isfinite(a))
    throw std::invalid_argument("OU drift a must be finite");
  if (!validate_kernel(kernel).passed())
    throw std::invalid_argument("kernel '" + kernel.name() +
                                "' fails admissibility validation");
}

double LimitPathEval::value(double vartheta, std::size_t idx) const {
  if (variant == StatVariant::D)
    return qv_part[idx] - mass_part[idx] / (vartheta * vartheta);
  return vartheta * qv_part[idx] - mass_part[idx] / vartheta;
}

double LimitPathEval::infimum(double vartheta) const {
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < qv_part.size(); ++i)
    inf = std::min(inf, value(vartheta, i));
  return inf;
}

namespace {

// Grid-dependent, path-independent tables for one simulation config.
struct SimTables {
  int n = 0;
  int i_start = 0;
  std::vector<double> kv;    // kv[d] = K(zeta d / n)
  std::vector<double> kd;    // kd[d] = K'(zeta d / n)
  std::vector<double> mass;  // mass[i] = int_0^{i/n} K(zeta u) du (trapezoid)
  int dk_max = 0;            // last d with kv[d] possibly nonzero
  int dd_max = 0;            // last d with kd[d] possibly nonzero
  double k0 = 0.0;           // K(0)
};

SimTables make_tables(const LimitSimConfig& cfg) {
  SimTables tb;
  const int n = cfg.n_grid;
  tb.n = n;
  tb.i_start = static_cast<int>(
      std::ceil(cfg.kappa * static_cast<double>(n) - 1e-9));
  if (tb.i_start < 1) tb.i_start = 1;
  tb.k0 = cfg.kernel(0.0);

  int reach = n;
  if (cfg.kernel.compact_support()) {
    const double r = cfg.kernel.support_radius() * n / cfg.zeta;
    if (r < static_cast<double>(n)) reach = static_cast<int>(std::ceil(r));
  }
  tb.dk_max = reach;
  tb.dd_max = reach;

  tb.kv.resize(static_cast<std::size_t>(n) + 1, 0.0);
  tb.kd.resize(static_cast<std::size_t>(n) + 1, 0.0);
  for (int d = 0; d <= std::min(reach, n); ++d) {
    const double z = cfg.zeta * static_cast<double>(d) / n;
    tb.kv[static_cast<std::size_t>(d)] = cfg.kernel(z);
    tb.kd[static_cast<std::size_t>(d)] = cfg.kernel.deriv(z);
  }

  // mass[i] = (1/n) * (sum_{d=1..i-1} kv[d] + (kv[0] + kv[i]) / 2)
  tb.mass.resize(static_cast<std::size_t>(n) + 1, 0.0);
  double run = 0.0;
  for (int i = 1; i <= n; ++i) {
    tb.mass[static_cast<std::size_t>(i)] =
        (run + (tb.kv[0] + tb.kv[static_cast<std::size_t>(i)]) / 2.0) / n;
    run += tb.kv[static_cast<std::size_t>(i)];
  }
  return tb;
}

// Exact one-step transition of the driver over 1/n.
void driver_step(double a, int n, double& phi, double& sig) {
  if (a == 0.0) {
    phi = 1.0;
    sig = std::sqrt(1.0 / static_cast<double>(n));
  } else {
    phi = std::exp(a / static_cast<double>(n));
    sig = std::sqrt((std::exp(2.0 * a / static_cast<double>(n)) - 1.0) /
                    (2.0 * a));
  }
}

// One driver path and the evaluated functional parts. Returns false when any
// monitored value fails to be finite (the caller redraws).
bool eval_path(const LimitSimConfig& cfg, const SimTables& tb,
               std::uint64_t path_seed, LimitPathEval& out) {
  const int n = tb.n;
  const int i0 = tb.i_start;
  rng::NormalSampler normals(path_seed);

  // Driver path via the exact OU transition over steps of 1/n. With a == 0
  // this is a Brownian path: phi = 1 multiplies exactly, and the step
  // standard deviation is sqrt(1/n), the a -> 0 limit of the OU variance.
  double phi, sig;
  driver_step(cfg.a, n, phi, sig);

  std::vector<double> c2(static_cast<std::size_t>(n) + 1, 0.0);  // Z(i/n)^2
  {
    double z = 0.0;
    for (int i = 1; i <= n; ++i) {
      z = phi * z + sig * normals.next();
      c2[static_cast<std::size_t>(i)] = z * z;
    }
  }

  // int_0^{i/n} Z^2 dr, trapezoid prefix (Z(0) = 0).
  std::vector<double> int_z2(static_cast<std::size_t>(n) + 1, 0.0);
  {
    double run = 0.0;
    for (int i = 1; i <= n; ++i) {
      int_z2[static_cast<std::size_t>(i)] =
          (run + c2[static_cast<std::size_t>(i)] / 2.0) / n;
      run += c2[static_cast<std::size_t>(i)];
    }
  }

  // conv1[i] = int_0^{i/n} Z^2(r) K'(zeta (i/n - r)) dr. The trapezoid
  // endpoint terms vanish (K'(0) = 0, Z(0) = 0), leaving a plain lag
  // convolution; accumulated lag-outer so the inner loop is a SAXPY.
  std::vector<double> conv1(static_cast<std::size_t>(n) + 1, 0.0);
  const int dd = std::min(tb.dd_max, n - 1);
  for (int d = 1; d <= dd; ++d) {
    const double w = tb.kd[static_cast<std::size_t>(d)];
    if (w == 0.0) continue;
    const int first = std::max(i0, d + 1);
    const double* src = c2.data() + (first - d);
    double* dst = conv1.data() + first;
    const int len = n - first + 1;
    for (int j = 0; j < len; ++j) dst[j] += w * src[j];
  }
  for (int i = i0; i <= n; ++i) conv1[static_cast<std::size_t>(i)] /= n;

  // Same convolution against K itself; only needed off the unit-root null.
  std::vector<double> convk;
  if (cfg.a != 0.0) {
    convk.assign(static_cast<std::size_t>(n) + 1, 0.0);
    const int dk = std::min(tb.dk_max, n - 1);
    for (int d = 1; d <= dk; ++d) {
      const double w = tb.kv[static_cast<std::size_t>(d)];
      if (w == 0.0) continue;
      const int first = std::max(i0, d + 1);
      const double* src = c2.data() + (first - d);
      double* dst = convk.data() + first;
      const int len = n - first + 1;
      for (int j = 0; j < len; ++j) dst[j] += w * src[j];
    }
    // Trapezoid endpoint for the K-convolution: the d = 0 term enters with
    // weight 1/2 (K(0) != 0, unlike K'(0)).
    for (int i = i0; i <= n; ++i)
      convk[static_cast<std::size_t>(i)] =
          (convk[static_cast<std::size_t>(i)] +
           tb.k0 * c2[static_cast<std::size_t>(i)] / 2.0) /
          n;
  }

  const std::size_t len = static_cast<std::size_t>(n - i0) + 1;
  out.variant = cfg.variant;
  out.i_start = i0;
  out.n_grid = n;
  out.qv_part.resize(len);
  out.mass_part.resize(len);

  bool ok = true;
  for (int i = i0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double braces_qv =
        tb.k0 * c2[static_cast<std::size_t>(i)] +
        cfg.zeta * conv1[static_cast<std::size_t>(i)] -
        (cfg.a != 0.0 ? 2.0 * cfg.a * convk[static_cast<std::size_t>(i)]
                      : 0.0);
    const double iz2 = int_z2[static_cast<std::size_t>(i)];
    double qv, mass;
    if (cfg.variant == StatVariant::D) {
      qv = (s / 2.0) * braces_qv / iz2;
      mass = (s / 2.0) * tb.mass[static_cast<std::size_t>(i)] / iz2;
    } else {
      const double root = std::sqrt(iz2);
      qv = 0.5 * braces_qv / root;
      mass = 0.5 * tb.mass[static_cast<std::size_t>(i)] / root;
    }
    if (!std::isfinite(qv) || !std::isfinite(mass)) ok = false;
    out.qv_part[static_cast<std::size_t>(i - i0)] = qv;
    out.mass_part[static_cast<std::size_t>(i - i0)] = mass;
  }
  return ok;
}

constexpr std::uint64_t kRedrawTag = 0x9D5A3C70F1E24B81ULL;
constexpr std::uint64_t kBootstrapTag = 0xB007B007B007B007ULL;

}  // namespace

LimitPathEval simulate_limit_path(const LimitSimConfig& cfg,
                                  std::uint64_t rep_index) {
  cfg.validate();
  const SimTables tb = make_tables(cfg);
  LimitPathEval out;
  eval_path(cfg, tb, rng::derive_subseed(cfg.seed, rep_index), out);
  return out;
}

double simulate_limit_inf(const LimitSimConfig& cfg, double vartheta,
                          std::uint64_t rep_index) {
  if (!(vartheta > 0.0))
    throw std::invalid_argument("vartheta must be > 0");
  return simulate_limit_path(cfg, rep_index).infimum(vartheta);
}

std::vector<double> simulate_driver_path(const LimitSimConfig& cfg,
                                         std::uint64_t rep_index) {
  cfg.validate();
  const int n = cfg.n_grid;
  rng::NormalSampler normals(rng::derive_subseed(cfg.seed, rep_index));
  double phi, sig;
  driver_step(cfg.a, n, phi, sig);
  std::vector<double> path(static_cast<std::size_t>(n) + 1, 0.0);
  double z = 0.0;
  for (int i = 1; i <= n; ++i) {
    z = phi * z + sig * normals.next();
    path[static_cast<std::size_t>(i)] = z;
  }
  return path;
}

std::vector<std::vector<double>> simulate_limit_inf_matrix(
    const LimitSimConfig& cfg, std::span<const double> varthetas) {
  cfg.validate();
  if (varthetas.empty())
    throw std::invalid_argument("vartheta list must not be empty");
  for (double v : varthetas)
    if (!(v > 0.0)) throw std::invalid_argument("vartheta must be > 0");

  const SimTables tb = make_tables(cfg);
  const std::size_t n_theta = varthetas.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  std::vector<std::vector<double>> result(n_theta,
                                          std::vector<double>(reps, 0.0));
  std::atomic<int> redraws{0};

  parallel_for_reps(reps, cfg.workers, [&](std::size_t rep) {
    LimitPathEval eval;
    std::uint64_t path_seed = rng::derive_subseed(cfg.seed, rep);
    bool ok = eval_path(cfg, tb, path_seed, eval);
    int attempts = 0;
    while (!ok && attempts < 5) {
      // Deterministic redraw chain: depends only on the rep's own seed.
      path_seed = rng::derive_subseed(path_seed, kRedrawTag);
      ok = eval_path(cfg, tb, path_seed, eval);
      ++attempts;
      redraws.fetch_add(1, std::memory_order_relaxed);
    }
    if (!ok)
      throw std::runtime_error(
          "simulation quality: replication kept evaluating non-finite after "
          "redraws");
    for (std::size_t j = 0; j < n_theta; ++j)
      result[j][rep] = eval.infimum(varthetas[j]);
  });

  if (static_cast<double>(redraws.load()) >
      0.001 * static_cast<double>(reps)) {
    std::ostringstream os;
    os << "simulation quality: " << redraws.load() << " of " << reps
       << " replications needed redraws (limit 0.1%)";
    throw std::runtime_error(os.str());
  }
  return result;
}

double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty())
    throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  const double g = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(g));
  const double frac = g - static_cast<double>(lo);
  if (lo + 1 >= n || frac == 0.0) return sample[lo];
  return sample[lo] + frac * (sample[lo + 1] - sample[lo]);
}

namespace {

// Bootstrap SE of the empirical p-quantile over a sorted sample. Each
// resample's quantile needs only two order statistics of the resampled
// indices, obtained with nth_element + a linear min scan (no full sort).
double bootstrap_quantile_se(const std::vector<double>& sorted, double p,
                             int resamples, std::uint64_t seed) {
  const std::size_t n = sorted.size();
  rng::Xoshiro256pp eng(seed);
  const double g = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(g));
  const double frac = g - static_cast<double>(lo);

  std::vector<std::uint32_t> idx(n);
  double mean = 0.0, m2 = 0.0;
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i)
      idx[i] = static_cast<std::uint32_t>(eng.uniform_below(n));
    auto mid = idx.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(idx.begin(), mid, idx.end());
    double q = sorted[*mid];
    if (frac != 0.0 && lo + 1 < n) {
      const std::uint32_t next = *std::min_element(mid + 1, idx.end());
      q += frac * (sorted[next] - q);
    }
    const double delta = q - mean;
    mean += delta / (b + 1);
    m2 += delta * (q - mean);
  }
  return resamples > 1 ? std::sqrt(m2 / (resamples - 1)) : 0.0;
}

constexpr int kBootstrapResamples = 200;

}  // namespace

CalibrationResult calibrate_control_limit(double alpha, double vartheta,
                                          StatVariant variant,
                                          const LimitSimConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("alpha must lie in (0, 0.5)");
  LimitSimConfig sim = cfg;
  sim.variant = variant;
  const double thetas[1] = {vartheta};
  auto draws = simulate_limit_inf_matrix(sim, thetas);

  std::vector<double> sorted = std::move(draws[0]);
  std::sort(sorted.begin(), sorted.end());
  CalibrationResult res;
  res.c = empirical_quantile(sorted, alpha);  // already sorted; cheap resort
  res.std_error = bootstrap_quantile_se(
      sorted, alpha, kBootstrapResamples,
      rng::derive_subseed(sim.seed, kBootstrapTag));
  if (!(res.c < 0.0)) {
    std::ostringstream os;
    os << "calibration produced a nonnegative control limit (c=" << res.c
       << " at vartheta=" << vartheta
       << "); the monitored infimum should be negative at these levels";
    throw std::runtime_error(os.str());
  }
  return res;
}

double ControlLimitCurve::evaluate(double vartheta, bool* clamped) const {
  if (knots.empty())
    throw std::invalid_argument("control limit curve has no knots");
  if (clamped) *clamped = false;
  if (vartheta <= knots.front().vartheta) {
    if (clamped && vartheta < knots.front().vartheta) *clamped = true;
    return knots.front().c;
  }
  if (vartheta >= knots.back().vartheta) {
    if (clamped && vartheta > knots.back().vartheta) *clamped = true;
    return knots.back().c;
  }
  auto it = std::upper_bound(
      knots.begin(), knots.end(), vartheta,
      [](double v, const CurveKnot& k) { return v < k.vartheta; });
  const CurveKnot& hi = *it;
  const CurveKnot& lo = *(it - 1);
  const double w = (vartheta - lo.vartheta) / (hi.vartheta - lo.vartheta);
  return lo.c + w * (hi.c - lo.c);
}

void ControlLimitCurve::validate() const {
  if (knots.size() < 2)
    throw std::invalid_argument("control limit curve needs >= 2 knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].vartheta > 0.0))
      throw std::invalid_argument("curve knot vartheta must be > 0");
    if (i > 0 && !(knots[i].vartheta > knots[i - 1].vartheta))
      throw std::invalid_argument(
          "curve knots must be strictly increasing in vartheta");
    if (!(knots[i].c < 0.0))
      throw std::invalid_argument("curve control limits must be negative");
  }
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("curve alpha must lie in (0, 0.5)");
  if (variant != StatVariant::D && variant != StatVariant::D_t_type)
    throw std::invalid_argument("curve variant must be D or D-t");
}

std::vector<double> default_vartheta_grid() {
  std::vector<double> grid;
  // 41 geometric points on [0.1, 2.0].  c(vartheta) is concave in vartheta,
  // so linear interpolation between knots undershoots (limits come out too
  // deep); the knot density bounds that error.  With ~7.8% spacing the chord
  // error near vartheta = 1 is below 0.01, negligible against the Monte Carlo
  // standard error of each knot.
  const double ratio = std::pow(2.0 / 0.1, 1.0 / 40.0);
  double v = 0.1;
  for (int i = 0; i < 41; ++i) {
    grid.push_back(v);
    v *= ratio;
  }
  grid[40] = 2.0;
  grid.push_back(1.0);
  // Variance ratios of the reference MA(1) alternatives.
  for (double beta : {-0.8, -0.5, 0.0, 0.5, 0.8})
    grid.push_back(std::abs(1.0 - beta) / std::sqrt(1.0 + beta * beta));
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double g : grid)
    if (out.empty() || g - out.back() > 1e-9) out.push_back(g);
  return out;
}

ControlLimitCurve build_curve(double alpha, StatVariant variant,
                              std::vector<double> vartheta_grid,
                              const LimitSimConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("alpha must lie in (0, 0.5)");
  if (vartheta_grid.size() < 5)
    throw std::invalid_argument("vartheta grid needs at least 5 points");
  std::sort(vartheta_grid.begin(), vartheta_grid.end());
  std::vector<double> grid;
  for (double g : vartheta_grid) {
    if (!(g > 0.0))
      throw std::invalid_argument("vartheta grid values must be > 0");
    if (grid.empty() || g - grid.back() > 1e-9) grid.push_back(g);
  }
  if (grid.size() < 5)
    throw std::invalid_argument("vartheta grid needs at least 5 distinct points");
  if (grid.front() > 0.15 + 1e-12 || grid.back() < 1.5 - 1e-12)
    throw std::invalid_argument(
        "vartheta grid must span at least [0.15, 1.5] so estimated ratios "
        "rarely fall outside it");

  LimitSimConfig sim = cfg;
  sim.variant = variant;
  auto draws = simulate_limit_inf_matrix(sim, grid);

  ControlLimitCurve curve;
  curve.alpha = alpha;
  curve.variant = variant;
  curve.kernel = sim.kernel.id();
  curve.kappa = sim.kappa;
  curve.zeta = sim.zeta;
  curve.n_grid = sim.n_grid;
  curve.reps = sim.reps;
  curve.seed = sim.seed;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<double> sorted = std::move(draws[j]);
    std::sort(sorted.begin(), sorted.end());
    CurveKnot knot;
    knot.vartheta = grid[j];
    knot.c = empirical_quantile(sorted, alpha);
    knot.std_error = bootstrap_quantile_se(
        sorted, alpha, kBootstrapResamples,
        rng::derive_subseed(sim.seed, kBootstrapTag + j));
    if (!(knot.c < 0.0)) {
      std::ostringstream os;
      os << "curve build: nonnegative control limit c=" << knot.c
         << " at vartheta=" << knot.vartheta;
      throw std::runtime_error(os.str());
    }
    curve.knots.push_back(knot);
  }
  curve.validate();
  return curve;
}

std::string curve_to_json(const ControlLimitCurve& curve) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["alpha"] = curve.alpha;
  j["variant"] = to_string(curve.variant);
  j["kernel"] = Kernel(curve.kernel).name();
  j["kappa"] = curve.kappa;
  j["zeta"] = curve.zeta;
  j["n_grid"] = curve.n_grid;
  j["reps"] = curve.reps;
  j["seed"] = curve.seed;
  auto knots = nlohmann::json::array();
  for (const auto& k : curve.knots)
    knots.push_back({k.vartheta, k.c, k.std_error});
  j["knots"] = std::move(knots);
  return j.dump(2) + "\n";
}

ControlLimitCurve curve_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("curve file is not valid JSON: ") +
                             e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1)
      throw std::runtime_error("curve file: unsupported format_version");
    ControlLimitCurve curve;
    curve.alpha = j.at("alpha").get<double>();
    curve.variant = parse_stat_variant(j.at("variant").get<std::string>());
    curve.kernel = Kernel::parse(j.at("kernel").get<std::string>()).id();
    curve.kappa = j.at("kappa").get<double>();
    curve.zeta = j.at("zeta").get<double>();
    curve.n_grid = j.at("n_grid").get<int>();
    curve.reps = j.at("reps").get<int>();
    curve.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("knots")) {
      if (!row.is_array() || row.size() != 3)
        throw std::runtime_error(
            "curve file: each knot must be [vartheta, c, std_error]");
      CurveKnot k;
      k.vartheta = row[0].get<double>();
      k.c = row[1].get<double>();
      k.std_error = row[2].get<double>();
      curve.knots.push_back(k);
    }
    curve.validate();
    return curve;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("curve file: ") + e.what());
  }
}

void save_curve(const ControlLimitCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open curve file for writing: " + path);
  out << curve_to_json(curve);
  if (!out) throw std::runtime_error("failed writing curve file: " + path);
}

ControlLimitCurve load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return curve_from_json(buf.str());
}

}  // namespace seqdf
