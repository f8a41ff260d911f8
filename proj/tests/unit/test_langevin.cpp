#include <doctest.h>

#include <cmath>

#include "qbm/langevin.hpp"

using namespace qbm;

namespace {

// Subsystem mode carrying all the weight; the bath mode is inert.
NormalModes decoupled(double omega) {
  const SpectralModel m(omega, {2.0 * omega}, {1e-3});
  return NormalModes(m, {omega, 2.0 * omega}, {1.0, 0.0});
}

NormalModes paper_modes(std::size_t n_total) {
  PaperBathParams p;
  p.n_total = n_total;
  return solve_normal_modes(build_paper_model(p));
}

}  // namespace

TEST_CASE("decoupled limit gives the bare oscillator") {
  const auto unit = decoupled(1.0);
  for (double t : {0.0, 0.3, 1.7, 50.0, 1234.5}) {
    const auto c = langevin_coefficients(unit, t);
    REQUIRE(c.valid);
    CHECK(c.gamma == 0.0);
    CHECK(c.omega_sq == 1.0);
  }
  const auto other = decoupled(1.3);
  for (double t : {0.3, 1.7, 50.0}) {
    const auto c = langevin_coefficients(other, t);
    CHECK(std::fabs(c.gamma) < 1e-15);
    CHECK(c.omega_sq == doctest::Approx(1.69).epsilon(1e-15));
  }
}

TEST_CASE("kernels at t = 0") {
  const auto modes = paper_modes(32);
  const auto k = kernels(modes, 0.0);
  CHECK(k.a == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(k.b == 0.0);
  CHECK(k.delta == doctest::Approx(1.0).epsilon(1e-14));
  // first moment of the weights is Omega
  CHECK(k.db == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Langevin equation holds along the exact trajectory") {
  const auto modes = paper_modes(32);
  const auto rep = verify_langevin_ode(modes, TimeGrid::span(0.0, 500.0, 2001));
  CHECK(rep.valid_samples > 0);
  CHECK(rep.relative < 1e-8);
  CHECK(rep.trials == 4);
}

TEST_CASE("coefficients relax towards the damped oscillator") {
  const auto modes = paper_modes(500);
  const auto c = langevin_coefficients(modes, 2000.0);
  REQUIRE(c.valid);
  CHECK(c.omega_sq == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(c.gamma > 0.0);
}

TEST_CASE("inverse rotation recovers the initial point") {
  const auto modes = paper_modes(32);
  const double t = 77.0;
  const PhasePoint x0{0.4, -1.2};
  const auto at = mean_phase_point(modes, x0, t);
  const auto back = invert_rotation(kernels(modes, t), at);
  CHECK(back.x == doctest::Approx(x0.x).epsilon(1e-10));
  CHECK(back.p == doctest::Approx(x0.p).epsilon(1e-10));
}

TEST_CASE("a vanishing wronskian is flagged") {
  KernelSample k;
  k.a = 0.0;
  k.b = 0.0;
  k.wronskian = 1e-14;
  const auto c = langevin_coefficients(k, 1.0);
  CHECK_FALSE(c.valid);
  CHECK(std::isnan(c.omega_sq));
}

TEST_CASE("series rows follow the grid") {
  const auto modes = paper_modes(10);
  const auto rows = langevin_series(modes, TimeGrid::span(0.0, 10.0, 6));
  REQUIRE(rows.size() == 6);
  CHECK(rows[3].kernel.t == doctest::Approx(6.0));
  CHECK(rows[3].coeffs.omega_sq == langevin_coefficients(modes, 6.0).omega_sq);
}
