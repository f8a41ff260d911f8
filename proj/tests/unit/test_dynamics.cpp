#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "qbm/dynamics.hpp"
#include "qbm/error.hpp"
#include "support/oracles.hpp"

using namespace qbm;

namespace {

NormalModes paper_modes(std::size_t n_total) {
  PaperBathParams p;
  p.n_total = n_total;
  return solve_normal_modes(build_paper_model(p));
}

}  // namespace

TEST_CASE("probabilities are normalised") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> time(0.0, 5e4);
  const auto modes = paper_modes(32);
  const std::size_t nb = modes.model().size();
  for (int k = 0; k < 25; ++k) {
    const double t = time(rng);
    const auto row = subsystem_bath_probabilities(modes, t);
    const double s = p_omega_omega(modes, t) + std::accumulate(row.begin(), row.end(), 0.0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    const std::size_t n = 1 + k % nb;
    const auto br = bath_row_probabilities(modes, n, t);
    const double s2 = p_omega_n(modes, n, t) + std::accumulate(br.begin(), br.end(), 0.0);
    CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row[n - 1] == doctest::Approx(p_omega_n(modes, n, t)).epsilon(1e-12));
    CHECK(br[(n % nb)] == doctest::Approx(p_nm(modes, n, 1 + n % nb, t)).epsilon(1e-10));
    CHECK(p_nm(modes, n, 1 + n % nb, t) ==
          doctest::Approx(p_nm(modes, 1 + n % nb, n, t)).epsilon(1e-10));
  }
}

TEST_CASE("survival amplitude at t = 0 and its modulus") {
  const auto modes = paper_modes(32);
  CHECK(std::abs(survival_amplitude(modes, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
  const double t = 321.0;
  CHECK(std::norm(survival_amplitude(modes, t)) ==
        doctest::Approx(p_omega_omega(modes, t)).epsilon(1e-13));
}

TEST_CASE("resonant two-mode Rabi oscillation") {
  const double g = 0.05;
  const SpectralModel m(1.0, {1.0}, {g});
  const auto modes = solve_normal_modes(m);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 10 * M_PI / g * i / 1000.0;
    worst = std::max(worst, std::fabs(p_omega_omega(modes, t) - std::pow(std::cos(g * t), 2)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("amplitude form equals the double cosine sum") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> time(0.0, 2000.0);
  for (std::size_t n : {1, 4, 9, 16}) {
    const auto m = testing::random_model(rng, n);
    const auto modes = solve_normal_modes(m);
    const auto init = InitialState::thermal(m);
    for (int k = 0; k < 10; ++k) {
      const double t = time(rng);
      const double ref = testing::n_omega_double_sum(modes, init, t);
      CHECK(mean_subsystem_occupation(modes, init, t) == doctest::Approx(ref).epsilon(1e-11));
    }
  }
}

TEST_CASE("total quanta are conserved") {
  std::mt19937_64 rng(3);
  const auto m = testing::random_model(rng, 24);
  const auto modes = solve_normal_modes(m);
  const auto init = InitialState::thermal(m);
  const double n0 = init.kappa + std::accumulate(init.bath_occupancies.begin(),
                                                 init.bath_occupancies.end(), 0.0);
  for (double t : {0.0, 17.0, 400.0, 9000.0})
    CHECK(total_quanta(modes, init, t) == doctest::Approx(n0).epsilon(1e-12));
}

TEST_CASE("phase-space means rotate at Omega without coupling strength") {
  const SpectralModel m(1.0, {3.0}, {1e-9});
  const auto modes = solve_normal_modes(m);
  const auto p = mean_phase_point(modes, {1.0, 0.0}, 2.0);
  CHECK(p.x == doctest::Approx(std::cos(2.0)).epsilon(1e-12));
  CHECK(p.p == doctest::Approx(-std::sin(2.0)).epsilon(1e-12));
  const auto modes32 = paper_modes(32);
  const double t = 55.0;
  const auto q = mean_phase_point(modes32, {0.3, -0.7}, t);
  CHECK(q.x == doctest::Approx(mean_position(modes32, 0.3, -0.7, t)));
  CHECK(q.p == doctest::Approx(mean_momentum_tilde(modes32, 0.3, -0.7, t)));
  // |<X> + i<P~>| = |s(t)| |x0 + i p0|
  CHECK(std::hypot(q.x, q.p) ==
        doctest::Approx(std::abs(survival_amplitude(modes32, t)) * std::hypot(0.3, 0.7)));
}

TEST_CASE("long-time transfer sums to the lost survival weight") {
  const auto modes = paper_modes(100);
  const auto theta = long_time_transfer(modes);
  double w4 = 0.0;
  for (double w : modes.weights()) w4 += w * w;
  CHECK(std::accumulate(theta.begin(), theta.end(), 0.0) == doctest::Approx(1.0 - w4));
}

TEST_CASE("evolve_series") {
  const auto modes = paper_modes(32);
  const auto init = InitialState::thermal(modes.model());
  EvolveRequest req;
  req.observables = {"N_omega", "P_surv", "X_mean", "P_tilde_mean", "N_total", "N_bath:3",
                     "P_omega_n:31"};
  const auto grid = TimeGrid::span(0.0, 100.0, 11);
  const auto ts = evolve_series(modes, init, grid, req);
  REQUIRE(ts.columns.size() == 7);
  CHECK(ts.grid.at(10) == doctest::Approx(100.0));
  CHECK(ts.column("P_surv")[4] == doctest::Approx(p_omega_omega(modes, 40.0)));
  CHECK(ts.column("N_bath:3")[7] == doctest::Approx(mean_bath_occupation(modes, init, 3, 70.0)));
  CHECK(ts.column("N_omega")[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(ts.column("missing"), std::out_of_range);

  req.observables = {"N_bath:32"};
  CHECK_THROWS_AS(evolve_series(modes, init, grid, req), ModelError);
  req.observables = {"energy"};
  CHECK_THROWS_AS(evolve_series(modes, init, grid, req), ModelError);
  CHECK_THROWS(TimeGrid::span(1.0, 0.0, 5));
  CHECK_THROWS_AS(p_omega_n(modes, 0, 1.0), std::out_of_range);
}
