#pragma once

// Exact diagonalisation of the one-particle (arrowhead) Hamiltonian
//
//     | Omega  g_1  ...  g_N |
//     | g_1    w_1           |
//     | ...         ...      |
//     | g_N              w_N |
//
// through its secular equation alpha - Omega - sum_n g_n^2/(alpha - w_n) = 0.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qbm/model.hpp"

namespace qbm {

/// Normal frequencies alpha_0 < ... < alpha_N and subsystem weights |Phi_nu|^2.
/// Bath coefficients phi_{nu n} = g_n Phi_nu / (alpha_nu - omega_n) are derived
/// on demand, with Phi_nu taken real and positive.
class NormalModes {
 public:
  /// `anchors`/`offsets` give each alpha as bath_freqs[anchor] + offset; when
  /// omitted they are derived from the nearest bath frequency.
  NormalModes(SpectralModel model, std::vector<double> alphas, std::vector<double> weights,
              std::vector<double> residuals = {}, std::vector<std::string> warnings = {},
              std::vector<std::size_t> anchors = {}, std::vector<double> offsets = {});

  const SpectralModel& model() const noexcept { return model_; }
  std::size_t size() const noexcept { return alphas_.size(); }

  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> residuals() const noexcept { return residuals_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  double amplitude(std::size_t nu) const;  // Phi_nu
  /// phi_{nu n} for bath index n in 1..N.
  double bath_coefficient(std::size_t nu, std::size_t n) const;

  /// min over nu, n of |alpha_nu - omega_n|.
  double min_pole_distance() const;

  /// alpha_nu - omega_i (i is 0-based), without the cancellation of the plain
  /// difference when the root sits next to a bath frequency.
  double pole_offset(std::size_t nu, std::size_t i) const;
  /// out[nu] = alpha_nu - omega_i for every nu.
  void pole_offsets(std::size_t i, double* out) const;
  /// alpha_{nu+1} - alpha_nu from the same anchored representation.
  double mode_gap(std::size_t nu) const;

 private:
  SpectralModel model_;
  std::vector<double> alphas_;
  std::vector<double> weights_;
  std::vector<double> residuals_;
  std::vector<std::string> warnings_;
  std::vector<std::size_t> anchors_;
  std::vector<double> offsets_;
};

/// f(alpha) = alpha - Omega - sum_n g_n^2 / (alpha - omega_n). Throws
/// SolverError if alpha coincides with a bath frequency (pole).
double secular_value(double alpha, const SpectralModel& model);

struct SolveOptions {
  double rel_tol = 1e-14;        // in (1e-16, 1e-6)
  bool parallel = true;
  double conditioning_floor = 1e-13;  // warn when min |alpha - omega| < floor * Omega
};

/// One root per interval (omega_n, omega_{n+1}) plus one below omega_1 and
/// one above omega_N. Each root is located in coordinates shifted to its
/// nearer pole, bracketed, and refined by safeguarded Newton steps. Weights
/// follow from |Phi|^2 = 1 / (1 + sum_n (g_n / (alpha - omega_n))^2).
NormalModes solve_normal_modes(const SpectralModel& model, const SolveOptions& opts = {});

/// Largest bath accepted by dense_oracle.
inline constexpr std::size_t kDenseOracleMaxN = 4096;

/// Reference solution from a general symmetric eigensolver on the full
/// (N+1)x(N+1) matrix; weights are squared first eigenvector components.
NormalModes dense_oracle(const SpectralModel& model);

struct ClosureReport {
  double completeness = 0.0;       // |sum_nu |Phi_nu|^2 - 1|
  double subsystem_bath = 0.0;     // max_n |sum_nu Phi_nu phi_{nu n}|
  double bath_bath = 0.0;          // max_{n,m} |sum_nu phi_{nu n} phi_{nu m} - delta_nm|
  double trace = 0.0;              // |sum alpha - Omega - sum omega| / (Omega + sum omega)
  double first_moment = 0.0;       // |sum |Phi|^2 alpha - Omega| / Omega

  double max_closure() const noexcept;
};

/// O(N^3) in the bath-bath block; intended for N up to a few hundred.
ClosureReport verify_closure(const NormalModes& modes);

}  // namespace qbm
