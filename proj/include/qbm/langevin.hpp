#pragma once

// Rotation kernels a(t), b(t) of the subsystem phase-space means and the
// coefficients of the local Langevin equation
//
//     <X>'' + Omega^2(t) <X> + Gamma(t) <X>' = 0
//
// obtained by eliminating the initial conditions.

#include <cstdint>
#include <vector>

#include "qbm/dynamics.hpp"
#include "qbm/eigensolve.hpp"

namespace qbm {

struct KernelSample {
  double t = 0.0;
  double a = 1.0, b = 0.0;
  double da = 0.0, db = 0.0;
  double dda = 0.0, ddb = 0.0;
  double delta = 1.0;      // a^2 + b^2
  double wronskian = 0.0;  // a b' - b a'
};

struct LangevinSample {
  double t = 0.0;
  double omega_sq = 0.0;
  double gamma = 0.0;
  bool valid = false;
};

/// Samples with |a b' - b a'| below this multiple of Omega are flagged invalid.
inline constexpr double kWronskianTolerance = 1e-12;

/// a = sum W cos(alpha t), b = sum W sin(alpha t) and their first two
/// derivatives, all as analytic mode sums.
KernelSample kernels(const NormalModes& modes, double t);

LangevinSample langevin_coefficients(const KernelSample& k, double omega_sub);
LangevinSample langevin_coefficients(const NormalModes& modes, double t);

/// Recover (x0, p0) from the means at time t; requires delta > 0.
PhasePoint invert_rotation(const KernelSample& k, PhasePoint at_t);

struct LangevinRow {
  KernelSample kernel;
  LangevinSample coeffs;
};

std::vector<LangevinRow> langevin_series(const NormalModes& modes, const TimeGrid& grid);

struct OdeReport {
  double max_residual = 0.0;  // max |X'' + Omega^2 X + Gamma X'| over valid samples
  double max_abs_x = 0.0;     // max |<X>|
  double relative = 0.0;      // max_residual / (Omega^2 max_abs_x)
  std::size_t valid_samples = 0;
  std::size_t invalid_samples = 0;
  std::size_t trials = 0;
};

/// Evaluates the Langevin residual for `trials` random initial points drawn
/// from a seeded generator; the worst trial is reported.
OdeReport verify_langevin_ode(const NormalModes& modes, const TimeGrid& grid,
                              std::size_t trials = 4, std::uint64_t seed = 12345);

}  // namespace qbm
