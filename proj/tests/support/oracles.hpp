#pragma once

// Slow reference formulas and model generators shared by the test suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qbm/eigensolve.hpp"
#include "qbm/model.hpp"

namespace qbm::testing {

/// Random model with n bath oscillators: distinct frequencies in
/// [0.5, 1.5], couplings of either sign with magnitude in [1e-3, 5e-2].
inline SpectralModel random_model(std::mt19937_64& rng, std::size_t n, double beta = 1.0) {
  std::uniform_real_distribution<double> freq(0.5, 1.5), mag(1e-3, 5e-2), omega(0.8, 1.2);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> w;
  while (w.size() < n) {
    const double x = freq(rng);
    if (std::none_of(w.begin(), w.end(), [&](double y) { return std::fabs(x - y) < 1e-6; }))
      w.push_back(x);
  }
  std::sort(w.begin(), w.end());
  std::vector<double> g(n);
  for (auto& x : g) x = sign(rng) ? mag(rng) : -mag(rng);
  return SpectralModel(omega(rng), w, g, ThermalParams{beta, 1.0, 1.0});
}

/// Literal double-cosine form of <N_Omega(t)>:
///   kappa sum_{nu,mu} W_nu W_mu cos((a_nu - a_mu) t)
///   + sum_n nbar_n sum_{nu,mu} Phi_nu phi_{nu n} Phi_mu phi_{mu n} cos((a_nu - a_mu) t)
inline double n_omega_double_sum(const NormalModes& modes, const InitialState& init, double t) {
  const std::size_t m = modes.size();
  const std::size_t nb = modes.model().size();
  const auto a = modes.alphas();
  const auto w = modes.weights();
  double p = 0.0;
  for (std::size_t nu = 0; nu < m; ++nu)
    for (std::size_t mu = 0; mu < m; ++mu) p += w[nu] * w[mu] * std::cos((a[nu] - a[mu]) * t);
  double total = init.kappa * p;
  for (std::size_t n = 1; n <= nb; ++n) {
    double q = 0.0;
    for (std::size_t nu = 0; nu < m; ++nu) {
      const double x = modes.amplitude(nu) * modes.bath_coefficient(nu, n);
      for (std::size_t mu = 0; mu < m; ++mu) {
        const double y = modes.amplitude(mu) * modes.bath_coefficient(mu, n);
        q += x * y * std::cos((a[nu] - a[mu]) * t);
      }
    }
    total += init.bath_occupancies[n - 1] * q;
  }
  return total;
}

/// Largest elementwise difference.
inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::fabs(x[i] - y[i]));
  return d;
}

}  // namespace qbm::testing
