#pragma once

// Poincare recurrence estimate, revival detection in sampled series and the
// exponential fit of the decay segment.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qbm/dynamics.hpp"
#include "qbm/eigensolve.hpp"

namespace qbm {

struct PoincareEstimate {
  double t_poincare = 0.0;  // 2 pi / min gap
  double min_gap = 0.0;
  std::size_t gap_argmin = 0;  // gap is alpha[i+1] - alpha[i]
};

PoincareEstimate poincare_time(const NormalModes& modes);

struct Peak {
  double t = 0.0;
  double height = 0.0;
  double width = 0.0;       // full width at half height above the plateau
  double rise = 0.0;        // time from the left half-height crossing to the top
  double fall = 0.0;        // time from the top to the right half-height crossing
  double asymmetry = 0.0;   // (fall - rise) / (fall + rise)
};

struct RevivalOptions {
  double threshold = 0.5;               // fraction of (initial - plateau)
  double plateau = 0.0;
  std::optional<double> min_separation;  // defaults to a quarter of t_poincare
  std::optional<double> t_poincare;
};

/// Interior local maxima above plateau + threshold (initial - plateau),
/// refined by a parabola through the three top samples, separated by at least
/// min_separation (taller peaks win). Sorted by time. Throws out_of_range if
/// the column is missing.
std::vector<Peak> detect_revivals(const TimeSeries& series, const std::string& column,
                                  const RevivalOptions& opts = {});

/// Mean spacing between consecutive peaks; nullopt with fewer than two.
std::optional<double> peak_spacing(const std::vector<Peak>& peaks);

struct FitWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct ExpFit {
  double gamma = 0.0;      // y - plateau ~ amplitude exp(-gamma t)
  double amplitude = 0.0;
  double residual = 0.0;   // rms of the log residuals
  std::size_t points = 0;
  FitWindow window;
};

/// Least-squares line through log(y - plateau) over the window. Throws
/// FitError on a non-positive value or fewer than three samples.
ExpFit fit_exponential(const TimeSeries& series, const std::string& column, FitWindow window,
                       double plateau);

/// [3 / Omega, min(0.2 t_P, 5 / gamma_est)]
FitWindow default_fit_window(double omega_sub, double t_poincare, double gamma_est);

/// 2 pi g_c^2 / dw at the bath oscillator nearest Omega, with dw the local
/// spacing; the discrete counterpart of 2 pi g^2(Omega).
double discrete_width_estimate(const SpectralModel& model);

/// Long-time average of <N_Omega>: sum_n theta_N(omega_n) nbar_n. For a finite
/// bath this includes the recurrences and sits below the pre-revival level by
/// the factor 1 - sum |Phi|^4.
double asymptotic_plateau(const NormalModes& modes, const InitialState& init);

/// Level reached after the decay and before the first revival:
/// sum theta nbar / sum theta.
double equilibrium_plateau(const NormalModes& modes, const InitialState& init);

struct RecurrenceReport {
  PoincareEstimate poincare;
  std::vector<Peak> peaks;
  std::optional<double> spacing;
  std::optional<ExpFit> fit;
  std::string fit_error;  // why the fit was rejected, if it was
  double plateau = 0.0;
  double asymptotic = 0.0;
};

}  // namespace qbm
