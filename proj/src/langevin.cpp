#include "qbm/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qbm/parallel.hpp"
#include "qbm/simd/kernels.hpp"

namespace qbm {

KernelSample kernels(const NormalModes& modes, double t) {
  const auto alpha = modes.alphas();
  const auto w = modes.weights();
  const std::size_t n = alpha.size();
  std::vector<double> w1(n), w2(n);
  for (std::size_t nu = 0; nu < n; ++nu) {
    w1[nu] = w[nu] * alpha[nu];
    w2[nu] = w1[nu] * alpha[nu];
  }
  const double* ws[3] = {w.data(), w1.data(), w2.data()};
  std::complex<double> s[3];
  simd::kernels().phase_sums(t, alpha.data(), n, ws, 3, s);

  // s_k = sum W alpha^k (cos - i sin)
  KernelSample k;
  k.t = t;
  k.a = s[0].real();
  k.b = -s[0].imag();
  k.da = s[1].imag();
  k.db = s[1].real();
  k.dda = -s[2].real();
  k.ddb = s[2].imag();
  k.delta = k.a * k.a + k.b * k.b;
  k.wronskian = k.a * k.db - k.b * k.da;
  return k;
}

LangevinSample langevin_coefficients(const KernelSample& k, double omega_sub) {
  LangevinSample out;
  out.t = k.t;
  if (!(std::fabs(k.wronskian) >= kWronskianTolerance * omega_sub)) {
    out.omega_sq = std::numeric_limits<double>::quiet_NaN();
    out.gamma = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.omega_sq = (k.da * k.ddb - k.db * k.dda) / k.wronskian;
  out.gamma = (k.b * k.dda - k.a * k.ddb) / k.wronskian;
  out.valid = true;
  return out;
}

LangevinSample langevin_coefficients(const NormalModes& modes, double t) {
  return langevin_coefficients(kernels(modes, t), modes.model().omega_sub());
}

PhasePoint invert_rotation(const KernelSample& k, PhasePoint p) {
  return {(k.a * p.x - k.b * p.p) / k.delta, (k.b * p.x + k.a * p.p) / k.delta};
}

std::vector<LangevinRow> langevin_series(const NormalModes& modes, const TimeGrid& grid) {
  grid.validate();
  std::vector<LangevinRow> rows(grid.count);
  const double omega = modes.model().omega_sub();
  parallel_for(grid.count, [&](std::size_t i) {
    rows[i].kernel = kernels(modes, grid.at(i));
    rows[i].coeffs = langevin_coefficients(rows[i].kernel, omega);
  });
  return rows;
}

OdeReport verify_langevin_ode(const NormalModes& modes, const TimeGrid& grid,
                              std::size_t trials, std::uint64_t seed) {
  const auto rows = langevin_series(modes, grid);
  const double omega = modes.model().omega_sub();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  OdeReport rep;
  rep.trials = trials;
  for (const auto& r : rows) (r.coeffs.valid ? rep.valid_samples : rep.invalid_samples)++;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const double x0 = dist(rng), p0 = dist(rng);
    double worst = 0.0, xmax = 0.0;
    for (const auto& r : rows) {
      const auto& k = r.kernel;
      const double x = k.a * x0 + k.b * p0;
      xmax = std::max(xmax, std::fabs(x));
      if (!r.coeffs.valid) continue;
      const double dx = k.da * x0 + k.db * p0;
      const double ddx = k.dda * x0 + k.ddb * p0;
      worst = std::max(worst, std::fabs(ddx + r.coeffs.omega_sq * x + r.coeffs.gamma * dx));
    }
    const double rel = xmax > 0.0 ? worst / (omega * omega * xmax) : 0.0;
    if (trial == 0 || rel > rep.relative) {
      rep.relative = rel;
      rep.max_residual = worst;
      rep.max_abs_x = xmax;
    }
  }
  return rep;
}

}  // namespace qbm
