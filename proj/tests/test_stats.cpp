// Sequential statistics: hand-computed values, independent oracles,
// invariances, and the nuisance (long-run variance) estimator.

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "seqdf/rng.hpp"
#include "seqdf/series.hpp"
#include "seqdf/stats.hpp"

namespace {

using seqdf::ChartConfig;
using seqdf::Kernel;
using seqdf::KernelId;
using seqdf::SeriesPath;
using seqdf::StatEvaluator;
using seqdf::StatVariant;

ChartConfig flat_config(int T) {
  ChartConfig cfg;
  cfg.T = T;
  cfg.kappa = 0.3;
  cfg.h = 1.0;  // ignored by the flat kernel
  cfg.kernel = Kernel(KernelId::flat_test);
  cfg.allow_flat_kernel = true;
  return cfg;
}

ChartConfig gaussian_config(int T, double h) {
  ChartConfig cfg;
  cfg.T = T;
  cfg.h = h;
  cfg.kernel = Kernel(KernelId::gaussian);
  return cfg;
}

SeriesPath seeded_walk(int T, std::uint64_t seed, double rho = 1.0,
                       double beta = 0.0) {
  seqdf::GenSpec spec;
  spec.rho = rho;
  spec.beta = beta;
  spec.T = T;
  spec.seed = seed;
  return seqdf::gen_arma11(spec);
}

SeriesPath scaled_copy(const SeriesPath& src, double c) {
  std::vector<double> values = src.values;
  for (double& v : values) v *= c;
  return seqdf::make_series(values, src.origin);
}

TEST(StatVariantTest, ParseAndPredicates) {
  EXPECT_EQ(seqdf::parse_stat_variant("D"), StatVariant::D);
  EXPECT_EQ(seqdf::parse_stat_variant("D-t"), StatVariant::D_t_type);
  EXPECT_EQ(seqdf::parse_stat_variant("E"), StatVariant::E);
  EXPECT_EQ(seqdf::parse_stat_variant("E-t"), StatVariant::E_t_type);
  EXPECT_THROW(seqdf::parse_stat_variant("F"), std::invalid_argument);

  for (auto v : {StatVariant::D, StatVariant::D_t_type, StatVariant::E,
                 StatVariant::E_t_type})
    EXPECT_EQ(seqdf::parse_stat_variant(seqdf::to_string(v)), v);

  EXPECT_FALSE(seqdf::is_t_type(StatVariant::D));
  EXPECT_TRUE(seqdf::is_t_type(StatVariant::D_t_type));
  EXPECT_FALSE(seqdf::is_t_type(StatVariant::E));
  EXPECT_TRUE(seqdf::is_t_type(StatVariant::E_t_type));
  EXPECT_FALSE(seqdf::is_corrected(StatVariant::D));
  EXPECT_FALSE(seqdf::is_corrected(StatVariant::D_t_type));
  EXPECT_TRUE(seqdf::is_corrected(StatVariant::E));
  EXPECT_TRUE(seqdf::is_corrected(StatVariant::E_t_type));
}

TEST(ChartConfigTest, ValidationErrors) {
  ChartConfig cfg = gaussian_config(250, 25.0);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.monitor_start(), 50);
  EXPECT_DOUBLE_EQ(cfg.zeta(), 10.0);

  ChartConfig bad = cfg;
  bad.T = 9;
  EXPECT_THROW(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.kappa = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.kappa = 0.6;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.kappa = 0.5;
  EXPECT_NO_THROW(bad.validate());

  bad = cfg;
  bad.h = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.alpha = 0.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);

  // The flat kernel is rejected unless the testing hook admits it.
  bad = cfg;
  bad.kernel = Kernel(KernelId::flat_test);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.allow_flat_kernel = true;
  EXPECT_NO_THROW(bad.validate());

  // floor(T * kappa) must leave at least two observations before monitoring.
  bad = cfg;
  bad.T = 10;
  bad.kappa = 0.15;  // floor(1.5) = 1
  EXPECT_THROW(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.force_m = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(LagTruncationTest, DefaultRule) {
  // max(1, floor(4 * (t/100)^(1/4)))
  EXPECT_EQ(seqdf::default_lag_truncation(1), 1);
  EXPECT_EQ(seqdf::default_lag_truncation(6), 1);
  EXPECT_EQ(seqdf::default_lag_truncation(50), 3);
  EXPECT_EQ(seqdf::default_lag_truncation(99), 3);
  EXPECT_EQ(seqdf::default_lag_truncation(100), 4);
  EXPECT_EQ(seqdf::default_lag_truncation(250), 5);
  EXPECT_EQ(seqdf::default_lag_truncation(1600), 8);
  EXPECT_THROW(seqdf::default_lag_truncation(0), std::out_of_range);
}

TEST(NeweyWestTest, HandValues) {
  // diffs (1, -1, 1, -1), t = 4, m = 2:
  //   sigma2   = 1
  //   gamma(1) = (-1 - 1 - 1)/4 = -3/4, Bartlett weight (2-1)/2 = 1/2
  //   gamma(2) = (1 + 1)/4 = 1/2,      weight 0
  //   eta2     = 1 + 2 * (1/2) * (-3/4) = 1/4
  // Every intermediate is dyadic, so the result is exact.
  const std::vector<double> diffs{1.0, -1.0, 1.0, -1.0};
  const auto nu = seqdf::newey_west(diffs, 4, 2);
  EXPECT_EQ(nu.t, 4);
  EXPECT_EQ(nu.m, 2);
  EXPECT_EQ(nu.sigma2, 1.0);
  EXPECT_EQ(nu.eta2, 0.25);
  EXPECT_EQ(nu.vartheta2, 0.25);
  EXPECT_DOUBLE_EQ(nu.vartheta(), 0.5);

  // Squared-autocovariance display: gamma(1)^2 = 9/16, so
  // eta2 = 1 + 2 * (1/2) * 9/16 = 1.5625, again exact.
  const auto sq = seqdf::newey_west(diffs, 4, 2, /*squared_gamma=*/true);
  EXPECT_EQ(sq.sigma2, 1.0);
  EXPECT_EQ(sq.eta2, 1.5625);
}

TEST(NeweyWestTest, MatchesLongDoubleOracle) {
  seqdf::rng::NormalSampler normals(991);
  std::vector<double> diffs(400);
  for (double& d : diffs) d = normals.next();
  for (int t : {10, 57, 256, 400}) {
    for (int m : {1, 2, 5, 9}) {
      const auto nu = seqdf::newey_west(diffs, t, m);
      const double ref = static_cast<double>(oracle::nw_eta2(diffs, t, m));
      EXPECT_NEAR(nu.eta2, ref, 1e-12 * std::max(1.0, std::fabs(ref)))
          << "t=" << t << " m=" << m;
    }
  }
}

TEST(NeweyWestTest, LagOneCollapsesToShortRunVariance) {
  // m = 1 gives a single Bartlett weight (1-1)/1 = 0, so the long-run and
  // short-run estimates coincide bit for bit and the ratio is exactly one.
  seqdf::rng::NormalSampler normals(17);
  std::vector<double> diffs(100);
  for (double& d : diffs) d = normals.next();
  const auto nu = seqdf::newey_west(diffs, 100, 1);
  EXPECT_EQ(nu.eta2, nu.sigma2);
  EXPECT_EQ(nu.vartheta2, 1.0);
}

TEST(NeweyWestTest, DegenerateSeriesReportsNeutralRatio) {
  const std::vector<double> diffs(50, 0.0);
  const auto nu = seqdf::newey_west(diffs, 50, 4);
  EXPECT_EQ(nu.sigma2, 0.0);
  EXPECT_EQ(nu.eta2, 0.0);
  EXPECT_EQ(nu.vartheta2, 1.0);
}

TEST(NeweyWestTest, InputValidation) {
  const std::vector<double> diffs(10, 1.0);
  EXPECT_THROW(seqdf::newey_west(diffs, 1, 1), std::out_of_range);
  EXPECT_THROW(seqdf::newey_west(diffs, 11, 2), std::invalid_argument);
  EXPECT_THROW(seqdf::newey_west(diffs, 10, 0), std::out_of_range);
  EXPECT_THROW(seqdf::newey_west(diffs, 10, 10), std::out_of_range);
}

TEST(NeweyWestTest, IidNoiseRatioNearOne) {
  // For iid innovations the long-run and short-run variances agree, so the
  // estimated ratio should settle near one on a long stretch.
  const int n = 100000;
  seqdf::rng::NormalSampler normals(4242);
  std::vector<double> diffs(static_cast<std::size_t>(n));
  for (double& d : diffs) d = normals.next();
  const int m = seqdf::default_lag_truncation(n);
  EXPECT_EQ(m, 22);
  const auto nu = seqdf::newey_west(diffs, n, m);
  EXPECT_NEAR(nu.vartheta2, 1.0, 0.05);
}

TEST(StatHandValuesTest, ShortRampUnderFlatKernel) {
  // Y = (0, 1, 2, 3, 4), t = 4, flat kernel. Least squares by hand:
  //   sum Y_{t'-1} dY_{t'} = 6,  sum Y_{t'-1}^2 = 14,  rho_hat = 20/14
  //   D    = t * 6/14 = 12/7
  //   s2   = ((1)^2 + (4/7)^2 + (1/7)^2 + (2/7)^2)/3 = 10/21
  //   D-t  = (12/7) / sqrt((10/21)/(14/16)) = 3*sqrt(15)/5 = 2.3237900077...
  const auto series = seqdf::make_series({0.0, 1.0, 2.0, 3.0, 4.0}, seqdf::SeriesOrigin::ingested);
  const ChartConfig cfg = flat_config(10);

  EXPECT_DOUBLE_EQ(seqdf::df_stat(series, cfg, 4), 12.0 / 7.0);
  EXPECT_NEAR(seqdf::df_t_stat(series, cfg, 4), 3.0 * std::sqrt(15.0) / 5.0,
              1e-14);

  StatEvaluator ev(series, cfg);
  EXPECT_NEAR(ev.resid_var_at(4), 10.0 / 21.0, 1e-14);
  EXPECT_EQ(ev.last_time(), 4);
}

TEST(StatOracleTest, FlatKernelReproducesClassicalLeastSquares) {
  // With every kernel weight equal to one the weighted statistic reduces to
  // t * (rho_hat - 1); compare against plain long-double least squares.
  const auto series = seeded_walk(200, 2024);
  const ChartConfig cfg = flat_config(200);
  StatEvaluator ev(series, cfg);
  for (int t : {3, 10, 50, 117, 200}) {
    const double d = ev.stat_at(t, StatVariant::D);
    const double d_oracle = static_cast<double>(seqdf::df_stat_flat_oracle(series, t));
    EXPECT_NEAR(d, d_oracle, 1e-12 * std::max(1.0, std::fabs(d_oracle)))
        << "t=" << t;
    const double d_ld =
        static_cast<double>(oracle::classic_coeff_stat(series.values, t));
    EXPECT_NEAR(d, d_ld, 1e-12 * std::max(1.0, std::fabs(d_ld))) << "t=" << t;

    const double dt = ev.stat_at(t, StatVariant::D_t_type);
    const double dt_ld =
        static_cast<double>(oracle::classic_t_stat(series.values, t));
    EXPECT_NEAR(dt, dt_ld, 1e-12 * std::max(1.0, std::fabs(dt_ld)))
        << "t=" << t;
  }
}

TEST(StatOracleTest, GaussianKernelMatchesDirectSum) {
  const auto series = seeded_walk(150, 555, 0.97, 0.3);
  const ChartConfig cfg = gaussian_config(150, 25.0);
  StatEvaluator ev(series, cfg);
  const auto K = [](double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
  };
  for (int t : {5, 30, 77, 150}) {
    const double got = ev.stat_at(t, StatVariant::D);
    const double ref =
        static_cast<double>(oracle::weighted_D(series.values, t, 25.0, K));
    EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::fabs(ref))) << "t=" << t;
  }
}

TEST(StatInvarianceTest, PowerOfTwoRescalingIsExact) {
  // Scaling the path by 4 multiplies every sum by an exact power of two, so
  // all four statistics must come back bit-identical.
  const auto series = seeded_walk(120, 31337, 0.95, -0.5);
  const auto scaled = scaled_copy(series, 4.0);
  const ChartConfig cfg = gaussian_config(120, 12.0);
  StatEvaluator ev(series, cfg);
  StatEvaluator ev4(scaled, cfg);
  for (int t = 3; t <= 120; ++t) {
    for (auto v : {StatVariant::D, StatVariant::D_t_type, StatVariant::E,
                   StatVariant::E_t_type})
      EXPECT_EQ(ev.stat_at(t, v), ev4.stat_at(t, v))
          << "t=" << t << " variant=" << seqdf::to_string(v);
  }
}

TEST(StatInvarianceTest, GeneralRescalingWithinRounding) {
  const auto series = seeded_walk(120, 90210, 1.0, 0.5);
  const auto scaled = scaled_copy(series, 17.3);
  const ChartConfig cfg = gaussian_config(120, 12.0);
  StatEvaluator ev(series, cfg);
  StatEvaluator evs(scaled, cfg);
  for (int t : {3, 24, 60, 120}) {
    for (auto v : {StatVariant::D, StatVariant::D_t_type, StatVariant::E,
                   StatVariant::E_t_type}) {
      const double a = ev.stat_at(t, v);
      const double b = evs.stat_at(t, v);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::fabs(a)))
          << "t=" << t << " variant=" << seqdf::to_string(v);
    }
  }
}

TEST(StatInvarianceTest, ValuesDependOnlyOnDataThroughT) {
  // The statistic at time t must be measurable with respect to the first t
  // observations: truncating the series after t cannot change it.
  const auto series = seeded_walk(100, 777, 0.9, 0.0);
  const ChartConfig cfg = gaussian_config(100, 10.0);
  StatEvaluator full(series, cfg);
  for (int t : {5, 37, 64}) {
    std::vector<double> head(series.values.begin(),
                             series.values.begin() + t + 1);
    const auto truncated = seqdf::make_series(head, seqdf::SeriesOrigin::ingested);
    StatEvaluator part(truncated, cfg);
    for (auto v : {StatVariant::D, StatVariant::D_t_type, StatVariant::E,
                   StatVariant::E_t_type})
      EXPECT_EQ(full.stat_at(t, v), part.stat_at(t, v))
          << "t=" << t << " variant=" << seqdf::to_string(v);
  }
}

TEST(StatCorrectionTest, LagOneTruncationMakesCorrectionVanish) {
  // With m = 1 the long-run estimate equals the short-run one exactly, so
  // the additive correction is zero and E collapses onto D bitwise.
  const auto series = seeded_walk(150, 60601);
  ChartConfig cfg = gaussian_config(150, 15.0);
  cfg.force_m = 1;
  StatEvaluator ev(series, cfg);
  for (int t : {10, 80, 150}) {
    EXPECT_EQ(ev.nuisance_at(t).vartheta2, 1.0) << "t=" << t;
    EXPECT_EQ(ev.stat_at(t, StatVariant::E), ev.stat_at(t, StatVariant::D))
        << "t=" << t;
  }
}

TEST(StatCorrectionTest, InjectedNuisanceCollapsesTTypeCorrection) {
  // Feeding the corrected statistics a nuisance estimate whose long- and
  // short-run variances both equal the internal studentization scale turns
  // the scale factor into exactly one and the correction into exactly zero,
  // so E-t must reproduce D-t bit for bit (and E reproduces D).
  const auto series = seeded_walk(200, 1119, 0.98, 0.3);
  const ChartConfig cfg = gaussian_config(200, 20.0);
  StatEvaluator ev(series, cfg);
  for (int t : {10, 64, 128, 200}) {
    const double s2 = ev.resid_var_at(t);
    seqdf::NuisanceEstimate nu;
    nu.t = t;
    nu.sigma2 = s2;
    nu.eta2 = s2;
    nu.vartheta2 = 1.0;
    nu.m = 1;
    EXPECT_EQ(ev.corrected_t_type_at(t, nu),
              ev.stat_at(t, StatVariant::D_t_type))
        << "t=" << t;
    EXPECT_EQ(ev.corrected_at(t, nu), ev.stat_at(t, StatVariant::D))
        << "t=" << t;
  }
}

TEST(StatEdgeCaseTest, AllZeroSeriesGivesZeroStatistics) {
  const auto series = seqdf::make_series(std::vector<double>(101, 0.0), seqdf::SeriesOrigin::ingested);
  const ChartConfig cfg = gaussian_config(100, 10.0);
  StatEvaluator ev(series, cfg);
  for (int t : {3, 50, 100})
    for (auto v : {StatVariant::D, StatVariant::D_t_type, StatVariant::E,
                   StatVariant::E_t_type})
      EXPECT_EQ(ev.stat_at(t, v), 0.0)
          << "t=" << t << " variant=" << seqdf::to_string(v);
}

TEST(StatEdgeCaseTest, TimeRangeErrors) {
  const auto series = seeded_walk(100, 5);
  const ChartConfig cfg = gaussian_config(100, 10.0);
  StatEvaluator ev(series, cfg);
  EXPECT_THROW(ev.stat_at(0, StatVariant::D), std::out_of_range);
  EXPECT_THROW(ev.stat_at(101, StatVariant::D), std::out_of_range);
  EXPECT_NO_THROW(ev.stat_at(1, StatVariant::D));
  EXPECT_THROW(ev.stat_at(1, StatVariant::E), std::out_of_range);
  EXPECT_NO_THROW(ev.stat_at(2, StatVariant::E));
  EXPECT_THROW(ev.stat_at(2, StatVariant::D_t_type), std::out_of_range);
  EXPECT_THROW(ev.stat_at(2, StatVariant::E_t_type), std::out_of_range);
  EXPECT_NO_THROW(ev.stat_at(3, StatVariant::D_t_type));

  // A series that ends before the horizon narrows the range and says so.
  const auto short_series = seqdf::make_series(
      std::vector<double>(series.values.begin(), series.values.begin() + 61),
      seqdf::SeriesOrigin::ingested);
  StatEvaluator short_ev(short_series, cfg);
  EXPECT_EQ(short_ev.last_time(), 60);
  try {
    short_ev.stat_at(61, StatVariant::D);
    FAIL() << "expected out_of_range";
  } catch (const std::out_of_range& e) {
    EXPECT_NE(std::string(e.what()).find("series ends before the horizon"),
              std::string::npos);
  }
}

TEST(TrajectoryTest, MatchesPerTimeEntryPoints) {
  const auto series = seeded_walk(80, 404, 0.96, -0.2);
  ChartConfig cfg = gaussian_config(80, 8.0);
  cfg.kappa = 0.25;
  const auto traj = seqdf::trajectory(series, cfg, StatVariant::D);
  ASSERT_FALSE(traj.times.empty());
  EXPECT_EQ(traj.times.front(), cfg.monitor_start());
  EXPECT_EQ(traj.times.back(), cfg.T);
  EXPECT_EQ(traj.times.size(), traj.stats.size());
  EXPECT_TRUE(traj.nuisance.empty());
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    EXPECT_EQ(traj.stats[i], seqdf::df_stat(series, cfg, traj.times[i]))
        << "t=" << traj.times[i];
}

TEST(TrajectoryTest, OptionsControlRangeStrideAndNuisance) {
  const auto series = seeded_walk(80, 404, 0.96, -0.2);
  const ChartConfig cfg = gaussian_config(80, 8.0);
  seqdf::TrajectoryOptions opt;
  opt.stride = 7;
  opt.t_start = 10;
  opt.t_end = 40;
  opt.include_nuisance = true;
  const auto traj = seqdf::trajectory(series, cfg, StatVariant::D, opt);
  const std::vector<int> expect_times{10, 17, 24, 31, 38};
  EXPECT_EQ(traj.times, expect_times);
  ASSERT_EQ(traj.nuisance.size(), traj.times.size());
  StatEvaluator ev(series, cfg);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    EXPECT_EQ(traj.nuisance[i].t, traj.times[i]);
    EXPECT_EQ(traj.nuisance[i].eta2, ev.nuisance_at(traj.times[i]).eta2);
  }

  // Corrected variants carry the nuisance estimates even when not requested.
  const auto corrected =
      seqdf::trajectory(series, cfg, StatVariant::E, {});
  EXPECT_EQ(corrected.nuisance.size(), corrected.times.size());

  seqdf::TrajectoryOptions bad;
  bad.stride = 0;
  EXPECT_THROW(seqdf::trajectory(series, cfg, StatVariant::D, bad),
               std::invalid_argument);
  bad = {};
  bad.t_start = 50;
  bad.t_end = 40;
  EXPECT_THROW(seqdf::trajectory(series, cfg, StatVariant::D, bad),
               std::invalid_argument);
}

TEST(TrajectoryTest, ForcedLagTruncationPropagates) {
  const auto series = seeded_walk(100, 31);
  ChartConfig cfg = gaussian_config(100, 10.0);
  cfg.force_m = 3;
  StatEvaluator ev(series, cfg);
  EXPECT_EQ(ev.nuisance_at(100).m, 3);

  ChartConfig def = gaussian_config(100, 10.0);
  StatEvaluator ev_def(series, def);
  // At t = 100 the default rule switches to m = 4, so the forced value is a
  // real override there.
  EXPECT_EQ(ev_def.nuisance_at(100).m, 4);

  // The forced truncation changes the corrected statistic (same inputs,
  // different smoothing), while leaving the uncorrected one untouched.
  EXPECT_EQ(ev.stat_at(100, StatVariant::D),
            ev_def.stat_at(100, StatVariant::D));
  EXPECT_NE(ev.stat_at(100, StatVariant::E),
            ev_def.stat_at(100, StatVariant::E));
}

}  // namespace
