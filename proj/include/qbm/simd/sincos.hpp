#pragma once

// Polynomial sine/cosine used by the vector kernels, in scalar form.
// Argument reduction is a three-term Cody-Waite split of pi/2; the products
// j*kPio2Hi are exact for |x| < 2^26 * pi/2, beyond which callers fall back
// to libm.

#include <cmath>

namespace qbm::simd {

namespace sincos_constants {
inline constexpr double kTwoOverPi = 0.63661977236758134308;
inline constexpr double kPio2Hi = 1.57079625129699707031e+00;
inline constexpr double kPio2Mid = 7.54978941586159635336e-08;
inline constexpr double kPio2Lo = 5.39030285815811905290e-15;
inline constexpr double kReduceLimit = 1.0e8;

// minimax fits on [-pi/4, pi/4]
inline constexpr double kSin[6] = {
    1.58962301576546568060e-10, -2.50507477628578072866e-08,
    2.75573136213857245213e-06, -1.98412698295895385996e-04,
    8.33333333332211858878e-03, -1.66666666666666307295e-01};
inline constexpr double kCos[6] = {
    -1.13585365213876817300e-11, 2.08757008419747316778e-09,
    -2.75573141792967388112e-07, 2.48015872888517045348e-05,
    -1.38888888888730564116e-03, 4.16666666666665929218e-02};
}  // namespace sincos_constants

/// Same operation sequence as the AVX2 lanes, so results match bit for bit.
inline void sincos_poly(double x, double& s, double& c) {
  using namespace sincos_constants;
  if (!(std::fabs(x) < kReduceLimit)) {
    s = std::sin(x);
    c = std::cos(x);
    return;
  }
  const double j = std::nearbyint(x * kTwoOverPi);
  const double r = ((x - j * kPio2Hi) - j * kPio2Mid) - j * kPio2Lo;
  const double z = r * r;

  double ps = kSin[0];
  for (int k = 1; k < 6; ++k) ps = ps * z + kSin[k];
  double pc = kCos[0];
  for (int k = 1; k < 6; ++k) pc = pc * z + kCos[k];
  const double sr = r + r * (z * ps);
  const double cr = (1.0 - 0.5 * z) + z * (z * pc);

  const int q = static_cast<int>(static_cast<long long>(j) & 3);
  const double ss = (q & 1) ? cr : sr;
  const double cc = (q & 1) ? sr : cr;
  s = (q & 2) ? -ss : ss;
  c = ((q + 1) & 2) ? -cc : cc;
}

}  // namespace qbm::simd
