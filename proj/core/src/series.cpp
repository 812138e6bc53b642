#include "seqdf/series.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "seqdf/rng.hpp"

namespace seqdf {

namespace {

void check_horizon(int T) {
  if (T < 2) throw std::invalid_argument("horizon T must be at least 2");
}

void check_rho(double rho) {
  if (!(rho > -1.0 && rho <= 1.0))
    throw std::invalid_argument("rho must lie in (-1, 1]");
}

// Shared ARMA(1,1) recursion. Draw order is fixed: the pre-sample error
// first, then one error per step, so that with beta = 0 the differences of a
// random walk reproduce the error stream exactly (offset by one draw).
SeriesPath gen_arma_core(double rho, double beta, int T, std::uint64_t seed) {
  rng::NormalSampler normals(seed);
  std::vector<double> y(static_cast<std::size_t>(T) + 1);
  y[0] = 0.0;
  double e_lag = normals.next();  // pre-sample error
  for (int t = 1; t <= T; ++t) {
    const double e_cur = normals.next();
    y[static_cast<std::size_t>(t)] =
        rho * y[static_cast<std::size_t>(t) - 1] + e_cur - beta * e_lag;
    e_lag = e_cur;
  }
  return make_series(std::move(y), SeriesOrigin::generated, seed);
}

}  // namespace

SeriesPath make_series(std::vector<double> values, SeriesOrigin origin,
                       std::optional<std::uint64_t> seed) {
  if (values.size() < 3)
    throw std::invalid_argument(
        "series needs at least 3 observations (Y_0, Y_1, Y_2)");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream os;
      os << "series value at index " << i << " is not finite";
      throw std::invalid_argument(os.str());
    }
  }
  SeriesPath s;
  s.values = std::move(values);
  s.diffs.resize(s.values.size() - 1);
  for (std::size_t t = 1; t < s.values.size(); ++t)
    s.diffs[t - 1] = s.values[t] - s.values[t - 1];
  s.origin = origin;
  s.seed = seed;
  return s;
}

SeriesPath gen_arma11(const GenSpec& spec) {
  check_horizon(spec.T);
  check_rho(spec.rho);
  return gen_arma_core(spec.rho, spec.beta, spec.T, spec.seed);
}

SeriesPath gen_local_to_unity(const GenSpec& spec) {
  check_horizon(spec.T);
  const double rho = 1.0 + spec.a / static_cast<double>(spec.T);
  if (!(rho > -1.0))
    throw std::invalid_argument(
        "local-to-unity drift a pushes rho = 1 + a/T out of (-1, 1]");
  if (rho > 1.0)
    throw std::invalid_argument(
        "local-to-unity drift a must be <= 0 (rho = 1 + a/T above 1)");
  return gen_arma_core(rho, spec.beta, spec.T, spec.seed);
}

std::vector<double> gen_arch1_innovations(double a0, double b1, int T,
                                          std::uint64_t seed) {
  if (!(a0 > 0.0))
    throw std::invalid_argument("ARCH baseline variance a0 must be > 0");
  if (!(b1 >= 0.0 && b1 < 1.0))
    throw std::invalid_argument(
        "ARCH feedback b1 must lie in [0, 1): no stationary solution otherwise");
  if (T < 1) throw std::invalid_argument("T must be at least 1");

  rng::NormalSampler normals(seed);
  constexpr int kBurnIn = 500;
  // Start the squared innovation at its stationary mean.
  double eps_prev_sq = a0 / (1.0 - b1);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T));
  for (int t = -kBurnIn; t < T; ++t) {
    const double var = a0 + b1 * eps_prev_sq;
    const double eps = std::sqrt(var) * normals.next();
    eps_prev_sq = eps * eps;
    if (t >= 0) out.push_back(eps);
  }
  return out;
}

SeriesPath generate(const GenSpec& spec) {
  switch (spec.model) {
    case GenModel::arma11:
      return gen_arma11(spec);
    case GenModel::local_to_unity:
      return gen_local_to_unity(spec);
    case GenModel::arch1_innovations: {
      check_horizon(spec.T);
      check_rho(spec.rho);
      const auto eps =
          gen_arch1_innovations(spec.arch_a0, spec.arch_b1, spec.T, spec.seed);
      std::vector<double> y(static_cast<std::size_t>(spec.T) + 1);
      y[0] = 0.0;
      for (int t = 1; t <= spec.T; ++t)
        y[static_cast<std::size_t>(t)] =
            spec.rho * y[static_cast<std::size_t>(t) - 1] +
            eps[static_cast<std::size_t>(t) - 1];
      return make_series(std::move(y), SeriesOrigin::generated, spec.seed);
    }
  }
  throw std::invalid_argument("unknown generation model");
}

SeriesFormat parse_series_format(const std::string& name) {
  if (name == "csv") return SeriesFormat::csv_single_column;
  if (name == "ndjson") return SeriesFormat::ndjson;
  throw std::invalid_argument("unknown series format '" + name +
                              "' (choices: csv, ndjson)");
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

SeriesPath ingest_series(const std::string& path, SeriesFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open series file: " + path);

  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (format == SeriesFormat::csv_single_column) {
      char* end = nullptr;
      const double v = std::strtod(body.c_str(), &end);
      if (end != body.c_str() + body.size())
        parse_fail(path, line_no, "not a number: '" + body + "'");
      values.push_back(v);
    } else {
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(body);
      } catch (const nlohmann::json::parse_error& e) {
        parse_fail(path, line_no, std::string("invalid JSON: ") + e.what());
      }
      if (!obj.is_object() || !obj.contains("y"))
        parse_fail(path, line_no, "expected an object with a \"y\" member");
      if (!obj["y"].is_number())
        parse_fail(path, line_no, "\"y\" is not a number");
      values.push_back(obj["y"].get<double>());
    }
  }
  if (values.size() < 3) {
    std::ostringstream os;
    os << path << ": needs at least 3 observations, found " << values.size();
    throw std::runtime_error(os.str());
  }
  return make_series(std::move(values), SeriesOrigin::ingested);
}

void write_series(const SeriesPath& series, const std::string& path,
                  SeriesFormat format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  char buf[64];
  for (const double v : series.values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (format == SeriesFormat::csv_single_column)
      out << buf << "\n";
    else
      out << "{\"y\": " << buf << "}\n";
  }
  if (!out) throw std::runtime_error("failed writing series file: " + path);
}

}  // namespace seqdf
