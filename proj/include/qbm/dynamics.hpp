#pragma once

// Closed-form time evolution of mean observables for a factorised initial
// state (subsystem with kappa quanta, bath thermal). Every probability is
// evaluated as |single mode sum|^2; the equivalent double-cosine sums are
// only used as test oracles.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qbm/eigensolve.hpp"
#include "qbm/model.hpp"

namespace qbm {

struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t count = 1;

  double at(std::size_t i) const noexcept { return t0 + dt * static_cast<double>(i); }
  double end() const noexcept { return at(count - 1); }
  void validate() const;  // dt > 0, count >= 1

  /// count samples covering [t0, t1] inclusive.
  static TimeGrid span(double t0, double t1, std::size_t count);
};

/// Named columns on a time grid. Invalid samples hold NaN and valid[i] = 0.
struct TimeSeries {
  TimeGrid grid;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<std::uint8_t> valid;

  std::size_t size() const noexcept { return grid.count; }
  bool has_column(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;  // throws if missing
  std::vector<double> times() const;
};

/// s(t) = sum_nu |Phi_nu|^2 exp(-i alpha_nu t)
std::complex<double> survival_amplitude(const NormalModes& modes, double t);

double p_omega_omega(const NormalModes& modes, double t);

/// |sum_nu Phi_nu phi_{nu n} exp(-i alpha_nu t)|^2, n in 1..N. Symmetric in
/// its two labels (P_{Omega n} = P_{n Omega}).
double p_omega_n(const NormalModes& modes, std::size_t n, double t);

/// |sum_nu phi_{nu n} phi_{nu m} exp(-i alpha_nu t)|^2, n, m in 1..N.
double p_nm(const NormalModes& modes, std::size_t n, std::size_t m, double t);

/// P_{Omega n}(t) for every n (index n-1 in the result). O(N^2).
std::vector<double> subsystem_bath_probabilities(const NormalModes& modes, double t);

/// P_{nm}(t) for fixed n and every m. O(N^2).
std::vector<double> bath_row_probabilities(const NormalModes& modes, std::size_t n, double t);

/// kappa P_{Omega Omega} + sum_n P_{Omega n} nbar_n
double mean_subsystem_occupation(const NormalModes& modes, const InitialState& init, double t);

/// kappa P_{n Omega} + sum_m P_{nm} nbar_m
double mean_bath_occupation(const NormalModes& modes, const InitialState& init, std::size_t n,
                            double t);

/// <N_Omega> + sum_n <N_n>; a constant of motion. O(N^3) per call.
double total_quanta(const NormalModes& modes, const InitialState& init, double t);

/// Subsystem phase-space means; the bath first moments vanish for a thermal
/// bath, so only the subsystem's (x0, p0) enter. `p` is P / (M Omega).
struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

PhasePoint mean_phase_point(const NormalModes& modes, PhasePoint initial, double t);
double mean_position(const NormalModes& modes, double x0, double p0, double t);
double mean_momentum_tilde(const NormalModes& modes, double x0, double p0, double t);

/// theta_N(omega_n) = P_{Omega n}(t -> infinity) averaged over time
///                  = sum_nu |Phi_nu|^4 g_n^2 / (alpha_nu - omega_n)^2.
std::vector<double> long_time_transfer(const NormalModes& modes);

/// Column names understood by evolve_series:
///   N_omega, P_surv, X_mean, P_tilde_mean, N_total,
///   N_bath:<n>, P_omega_n:<n>   (n in 1..N)
struct EvolveRequest {
  std::vector<std::string> observables;
  PhasePoint initial{1.0, 0.0};  // used by X_mean / P_tilde_mean
};

void validate_observables(const NormalModes& modes, std::span<const std::string> names);

/// Samples are independent and evaluated in parallel; the output does not
/// depend on the schedule.
TimeSeries evolve_series(const NormalModes& modes, const InitialState& init,
                         const TimeGrid& grid, const EvolveRequest& request);

}  // namespace qbm
