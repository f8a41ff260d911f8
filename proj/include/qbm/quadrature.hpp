#pragma once

// Adaptive Gauss-Kronrod integration with a global error budget, principal
// values by singularity subtraction, and fixed Gauss-Legendre panels.

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace qbm::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // integral of |f|
  std::size_t intervals = 0;
};

struct ComplexResult {
  std::complex<double> value;
  double error = 0.0;
  double l1 = 0.0;
  std::size_t intervals = 0;
};

using RealFn = std::function<double(double)>;
using ComplexFn = std::function<std::complex<double>(double)>;

/// Throws ModelError unless tol lies in (1e-14, 1e-6).
void check_tolerance(double tol);

inline constexpr std::size_t kMaxIntervals = 4000;

/// Splits [a, b] at the given interior points, then bisects the interval with
/// the largest error until the summed error is below tol * l1. Throws
/// QuadratureError with the achieved estimate otherwise. b may be +infinity.
Result integrate(const RealFn& f, double a, double b, double tol,
                 std::span<const double> breaks = {});
ComplexResult integrate(const ComplexFn& f, double a, double b, double tol,
                        std::span<const double> breaks = {});

/// PV int_a^b f(w) / (x - w) dw for a < x < b, as
/// int (f(w) - f(x)) / (x - w) dw + f(x) log((x - a) / (b - x)).
Result principal_value(const RealFn& f, double a, double b, double x, double tol);

/// int_a^b f(w) / (z - w) dw for complex z off the real segment. `fz` is the
/// analytic continuation of f, used to subtract the near singularity:
/// int (f(w) - fz(z)) / (z - w) dw + fz(z) [log(z - a) - log(z - b)].
ComplexResult cauchy_integral(const RealFn& f,
                              const std::function<std::complex<double>(std::complex<double>)>& fz,
                              double a, double b, std::complex<double> z, double tol);

/// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const Rule& gauss_legendre_10();

/// Nodes and weights of `panels` equal panels covering [a, b].
Rule composite_rule(double a, double b, std::size_t panels);

}  // namespace qbm::quad
