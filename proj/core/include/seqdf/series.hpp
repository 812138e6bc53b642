#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seqdf {

enum class SeriesOrigin { generated, ingested };

// A univariate path Y_0..Y_T together with its first differences.
// diffs[t-1] = values[t] - values[t-1] for t = 1..T.
struct SeriesPath {
  std::vector<double> values;
  std::vector<double> diffs;
  SeriesOrigin origin = SeriesOrigin::generated;
  std::optional<std::uint64_t> seed;

  int horizon() const { return static_cast<int>(values.size()) - 1; }
};

// Wraps raw observations into a SeriesPath, computing differences and
// rejecting non-finite entries (error names the offending index).
SeriesPath make_series(std::vector<double> values, SeriesOrigin origin,
                       std::optional<std::uint64_t> seed = std::nullopt);

// Data generating processes for simulation studies:
//
//  arma11              Y_t = rho Y_{t-1} + e_{t-1} - beta e_{t-2}, Y_0 = 0,
//                      with iid standard normal errors. The pre-sample error
//                      is drawn from the same stream, so the difference
//                      sequence is well defined from t = 1 on.
//  local_to_unity      the same recursion with rho = 1 + a/T. a = 0 coincides
//                      bit for bit with arma11 at rho = 1.
//  arch1_innovations   Y_t = rho Y_{t-1} + eps_t where eps_t follows an
//                      ARCH(1) scheme with conditional variance
//                      a0 + b1 eps_{t-1}^2, burned in to stationarity.
enum class GenModel { arma11, local_to_unity, arch1_innovations };

struct GenSpec {
  GenModel model = GenModel::arma11;
  double rho = 1.0;      // AR coefficient; must lie in (-1, 1]
  double beta = 0.0;     // MA coefficient
  double a = 0.0;        // local-to-unity drift: rho_T = 1 + a/T
  int T = 250;           // horizon; path has T+1 values
  std::uint64_t seed = 0;
  double arch_a0 = 1.0;  // ARCH(1) baseline variance; must be > 0
  double arch_b1 = 0.3;  // ARCH(1) feedback; must lie in [0, 1)
};

SeriesPath generate(const GenSpec& spec);
SeriesPath gen_arma11(const GenSpec& spec);
SeriesPath gen_local_to_unity(const GenSpec& spec);

// Stationary ARCH(1) innovation sequence eps_0..eps_{T-1} after a 500-step
// burn-in. Stationary variance is a0 / (1 - b1). Throws std::invalid_argument
// when b1 >= 1 (no stationary solution) or a0 <= 0.
std::vector<double> gen_arch1_innovations(double a0, double b1, int T,
                                          std::uint64_t seed);

enum class SeriesFormat { csv_single_column, ndjson };

// Accepts "csv" and "ndjson".
SeriesFormat parse_series_format(const std::string& name);

// Reads a series from disk. CSV: one value per line, no header. NDJSON: one
// {"y": <number>} object per line. Parse failures report the 1-based line
// number; fewer than 3 observations is an error (nothing can be monitored).
SeriesPath ingest_series(const std::string& path, SeriesFormat format);

// Writes values with round-trip (17 significant digit) precision.
void write_series(const SeriesPath& series, const std::string& path,
                  SeriesFormat format);

}  // namespace seqdf
