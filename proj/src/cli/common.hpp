#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "output.hpp"
#include "qbm/model.hpp"

namespace qbm::cli {

/// Bad flags, unreadable or malformed input; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A check requested by the user did not pass; exit code 1.
class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;

  // model
  bool paper_defaults = false;
  std::size_t n_total = 32;
  std::string convention = "prose";
  double band_width = 0.018;
  double d_over_a = 1.0;
  std::optional<double> omega_sub, beta, kappa, mass;
  std::string model_file;

  // run
  std::string out_dir = "qbm-out";
  std::string simd = "auto";
  double rel_tol = 1e-14;
  double quad_tol = 1e-10;

  // time grids
  double t0 = 0.0;
  std::optional<double> t_max;
  std::size_t samples = 2001;
  std::vector<std::string> obs;
  double x0 = 1.0, p0 = 0.0;

  // recurrence
  double horizon = 3.0;  // in units of t_P
  std::string column = "P_surv";
  double threshold = 0.5;
  std::size_t fit_samples = 2001;

  // continuum
  std::string density;  // empty: derived from the model
  double strength = 0.005, center = 1.0, width = 0.1;
  double c1 = 0.01, c2 = 1.0, slope = 0.01, value = 0.001;
  std::optional<double> omega_min, omega_max;
  double series_t_max = 0.0;
  std::size_t series_samples = 0;
  bool no_refine = false;
  double cpc_delta = 0.0;

  // sweep
  std::vector<std::size_t> n_list{10, 32, 100, 500};
  bool overlay = false;

  // validate
  std::optional<double> delta;

  /// Arguments that reproduce this run (config expanded, model inlined).
  std::vector<std::string> effective_args;
  /// Model text when the model came from a file or a config [bath] section.
  std::optional<std::string> model_text;
};

struct Context {
  Options opt;
  std::ostream& out;
  std::ostream& err;
  std::filesystem::path dir;
  Json manifest;
  std::vector<std::string> outputs;

  // created on first write so usage errors leave nothing behind
  void ensure_dir() {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory '" + opt.out_dir + "'");
  }

  std::filesystem::path file(const std::string& name) {
    ensure_dir();
    outputs.push_back(name);
    return dir / name;
  }
};

int cmd_solve(Context& c);
int cmd_evolve(Context& c);
int cmd_langevin(Context& c);
int cmd_recurrence(Context& c);
int cmd_continuum(Context& c);
int cmd_sweep(Context& c);
int cmd_validate(Context& c);

/// Writes manifest.json listing every output (including itself).
void finish_manifest(Context& c);

}  // namespace qbm::cli
