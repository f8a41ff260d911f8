#pragma once

// Continuum limit of the bath: boundary values of the reduced resolvent
//
//     R^{-1}(z) = z - Omega - int g^2(w) / (z - w) dw,
//
// frequency shift, width and complex pole, the survival amplitude as an
// integral over the normal-mode weight density, and its short- and long-time
// regimes.

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qbm/model.hpp"

namespace qbm {

/// g^2(w) = strength * width^2 / (width^2 + (w - center)^2)
struct LorentzianDensity {
  double strength = 0.0;
  double center = 1.0;
  double width = 0.1;
};

/// g(w) = c1 w / sqrt(c2^2 + w^2), i.e. g^2 = c1^2 w^2 / (c2^2 + w^2)
struct UllersmaDensity {
  double c1 = 0.01;
  double c2 = 1.0;
};

/// g^2(w) = slope * w (ohmic)
struct LinearDensity {
  double slope = 0.0;
};

struct ConstantDensity {
  double value = 0.0;
};

struct ZeroDensity {};

/// Continuum counterpart of an equidistant bath with Lorentzian couplings:
/// g^2(w) = (D a^2 / (a^2 + (w - center)^2))^2 / A, so that g^2(w_n) A = g_n^2.
struct DiscreteLorentzianDensity {
  double d_amp = 0.0;
  double a_width = 1.0;
  double center = 1.0;
  double spacing = 1.0;
};

using SpectralDensity = std::variant<LorentzianDensity, UllersmaDensity, LinearDensity,
                                     ConstantDensity, ZeroDensity, DiscreteLorentzianDensity>;

double density(const SpectralDensity& d, double w);
/// Analytic continuation off the real axis.
std::complex<double> density(const SpectralDensity& d, std::complex<double> z);
std::string describe(const SpectralDensity& d);

/// The continuum model of an equidistant Lorentzian bath (g^2(w_n) = g_n^2 / A),
/// on the band [w_1 - A/2, w_N + A/2].
struct ContinuumModel;
ContinuumModel continuum_of(const SpectralModel& model);

struct ContinuumModel {
  SpectralDensity g_sq;
  double omega_min = 0.0;
  double omega_max = 2.0;  // may be +infinity for validate_continuum only
  double omega_sub = 1.0;
  double beta = 1.0;

  /// omega_min < Omega < omega_max, finite Omega and beta > 0.
  void check() const;
  /// check() plus a finite band and g^2(Omega) > 0.
  void check_decaying() const;
  double g_sq_at(double w) const { return density(g_sq, w); }
};

/// PV int g^2(w) / (x - w) dw over the band.
double pv_integral(const ContinuumModel& cm, double x, double quad_tol);

/// delta Omega = PV int g^2(w) / (Omega - w) dw
double pv_shift(const ContinuumModel& cm, double quad_tol);

/// Gamma = 2 pi g^2(Omega)
double width(const ContinuumModel& cm);

enum class Side { upper, lower };

/// R^{-1}(alpha +- i0) = alpha - Omega - PV int g^2/(alpha - w) dw +- i pi g^2(alpha).
/// The two sides differ by 2 i pi g^2(alpha) and are complex conjugates.
std::complex<double> resolvent_boundary(const ContinuumModel& cm, double alpha, double quad_tol,
                                        Side side = Side::upper);

/// Continuation of R^{-1} from the upper half plane into Im z < 0:
/// z - Omega - int g^2/(z - w) dw + 2 i pi g^2(z).
std::complex<double> resolvent_second_sheet(const ContinuumModel& cm, std::complex<double> z,
                                            double quad_tol);

struct PoleEstimate {
  double delta_omega = 0.0;
  double gamma = 0.0;
  std::complex<double> z0;           // Omega + delta_omega - i gamma / 2
  std::optional<std::complex<double>> refined;  // zero of the second-sheet function
  std::complex<double> residue_derivative;      // d/dz R_+^{-1} at the refined pole (or z0)
  std::size_t newton_steps = 0;
  bool converged = false;
};

/// Second-order estimate; with `refine` the zero is polished by damped Newton
/// steps on resolvent_second_sheet.
PoleEstimate pole_estimate(const ContinuumModel& cm, double quad_tol, bool refine = true);

/// |Phi_alpha|^2 = g^2(alpha) / |R^{-1}(alpha + i0)|^2
double weight_density(const ContinuumModel& cm, double alpha, double quad_tol);

/// int |Phi_alpha|^2 d alpha over the band (1 without bound states).
double weight_normalization(const ContinuumModel& cm, double quad_tol);

/// Survival amplitude int |Phi_alpha|^2 exp(-i alpha t) d alpha on fixed
/// Gauss-Legendre panels. The panel width h obeys h t_max <= 0.5; times
/// beyond t_max are refused.
class ContinuumPropagator {
 public:
  ContinuumPropagator(const ContinuumModel& cm, double t_max, double quad_tol,
                      std::size_t max_nodes = 4'000'000);

  std::complex<double> amplitude(double t) const;
  double survival_probability(double t) const { return std::norm(amplitude(t)); }

  /// 1 - |s(t)|^2 / |s(0)|^2, evaluated without cancellation at short times.
  double decay_defect(double t) const;

  double normalization() const noexcept { return norm_; }
  double t_max() const noexcept { return t_max_; }
  std::size_t nodes() const noexcept { return alpha_.size(); }
  double panel_width() const noexcept { return panel_; }

 private:
  void check_time(double t) const;

  double t_max_;
  double panel_;
  double norm_ = 0.0;
  double mean_ = 0.0;
  std::vector<double> alpha_;
  std::vector<double> weight_;      // quadrature weight * density
  std::vector<double> centered_;    // alpha - mean
  std::vector<double> normalized_;  // weight_ / norm_
};

std::complex<double> survival_amplitude_continuum(const ContinuumModel& cm, double t,
                                                  double quad_tol);

struct PowerFit {
  double exponent = 0.0;   // slope of log y against log t
  double prefactor = 0.0;
  double residual = 0.0;   // rms log residual
  std::size_t points = 0;
};

/// Exponent of 1 - |s|^2 over short times [t_lo, t_hi].
PowerFit zeno_fit(const ContinuumPropagator& prop, double t_lo, double t_hi,
                  std::size_t samples = 40);

struct KhalfinFit {
  PowerFit fit;
  double lambda = 0.0;  // (omega_max^4 - omega_min^4)^{1/4}
};

/// Log-log slope of |s(t)|^2 over [t_lo, t_hi]; requires omega_min > 0 and
/// 10 / omega_max <= t_lo < t_hi <= 1 / omega_min.
KhalfinFit khalfin_tail(const ContinuumModel& cm, double t_lo, double t_hi, double quad_tol,
                        std::size_t samples = 60);

/// Small-frequency approximation of the Ullersma tail amplitude:
/// (c1/c2)^2 / (omega_min - Omega)^2 * i t^-3 [(u^2 - 2iu - 2) e^{-iu}] from
/// u = omega_min t to omega_max t.
std::complex<double> khalfin_low_frequency_amplitude(const UllersmaDensity& u, double omega_min,
                                                     double omega_max, double omega_sub,
                                                     double t);

/// Weak coupling: 1 / (exp(beta Omega) - 1). Otherwise the band integral of
/// |Phi_alpha|^2 nbar(alpha).
double asymptotic_occupation(const ContinuumModel& cm, bool weak_coupling, double quad_tol);

struct ContinuumValidity {
  double delta = 0.0;
  double left_sum = 0.0, right_sum = 0.0;  // +infinity when divergent
  double left_bound = 0.0, right_bound = 0.0;
  bool left_divergent = false, right_divergent = false;
  bool passes[2] = {false, false};
  std::string note;

  bool all_pass() const noexcept { return passes[0] && passes[1]; }
};

/// int g^2 / (w - omega_min + delta) < Omega - omega_min + delta and
/// int g^2 / (omega_max + delta - w) < omega_max + delta - Omega. With
/// delta = 0 a density that does not vanish at a cutoff diverges
/// logarithmically; this is reported as a failed condition.
ContinuumValidity validate_continuum(const ContinuumModel& cm, double quad_tol,
                                     double delta = 0.0);

}  // namespace qbm
