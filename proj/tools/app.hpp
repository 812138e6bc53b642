#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

// Command line front end. Kept as a library so tests can drive parsing and
// dispatch in-process; seqdf_main.cpp is just a thin shell around run().

namespace seqdf::cli {

struct Options {
  std::uint64_t seed = 0;
  int workers = 0;

  struct Calibrate {
    double alpha = 0.05;
    std::string variant = "D";
    double kappa = 0.2;
    double zeta = 10.0;
    std::string kernel = "gaussian";
    int n_grid = 1000;
    int reps = 20000;
    std::string vartheta_grid;  // comma-separated; empty = default grid
    std::optional<double> single_vartheta;
    std::string out;
  } cal;

  struct Monitor {
    std::string input;
    std::string format = "csv";
    std::string chart = "S-fixed";
    int T = 250;
    std::optional<double> kappa;  // unset = chart default
    double h = 25.0;
    std::string kernel = "gaussian";
    double alpha = 0.05;
    std::optional<double> limit;
    std::string curve;
    bool nw_squared_gamma = false;
    std::string report;
  } mon;

  struct Simulate {
    std::string model = "arma11";
    double rho = 1.0;
    double beta = 0.0;
    double a = 0.0;
    int T = 250;
    double arch_a0 = 1.0;
    double arch_b1 = 0.3;
    std::string out;
    std::string format = "csv";
  } sim;

  struct Reproduce {
    std::string out_dir;
    int reps = 2000;
    int calib_reps = 20000;
    int n_grid = 1000;
    int T = 250;
    double h = 25.0;
    double alpha = 0.05;
    double kappa = 0.2;
    double kappa_t_hat = 0.3;
    std::string rho_list = "1,0.98,0.95,0.9";
    std::string beta_list = "-0.8,-0.5,0,0.5,0.8";
    std::string charts = "S-hat,S-hat-t,Z,Z-t";
    std::string curve_cache;  // empty = <out-dir>/curves
    bool no_cache = false;
    bool nw_squared_gamma = false;
  } rep;

  struct ValidateKernel {
    std::string kernel = "gaussian";
  } vk;
};

// Builds the CLI11 application bound to `opt`. `opt` must outlive the app.
std::unique_ptr<CLI::App> build_app(Options& opt);

// Executes whichever subcommand was parsed into `app`. Returns the process
// exit code; failures print "error: ..." to stderr.
int dispatch(const Options& opt, const CLI::App& app);

// Parse + dispatch.
int run(int argc, const char* const* argv);

}  // namespace seqdf::cli
