#include <doctest.h>

#include <cmath>
#include <limits>

#include "qbm/error.hpp"
#include "qbm/quadrature.hpp"

using namespace qbm;
using quad::RealFn;

TEST_CASE("smooth integrals") {
  const auto r = quad::integrate(RealFn([](double x) { return std::exp(x); }), 0.0, 1.0, 1e-12);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  CHECK(r.error <= 1e-12 * r.l1);
  const auto osc = quad::integrate(RealFn([](double x) { return std::cos(50 * x); }), 0.0, 3.0,
                                   1e-12);
  CHECK(osc.value == doctest::Approx(std::sin(150.0) / 50.0).epsilon(1e-10));
}

TEST_CASE("semi-infinite interval") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto r = quad::integrate(RealFn([](double x) { return std::exp(-x); }), 0.0, inf, 1e-12);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  const auto s = quad::integrate(RealFn([](double x) { return 1.0 / (1.0 + x * x); }), 0.0, inf,
                                 1e-12);
  CHECK(s.value == doctest::Approx(M_PI / 2).epsilon(1e-12));
}

TEST_CASE("breakpoints and endpoint kinks") {
  const double br[] = {0.3};
  const auto r =
      quad::integrate(RealFn([](double x) { return std::fabs(x - 0.3); }), 0.0, 1.0, 1e-12, br);
  CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-13));
}

TEST_CASE("complex integrand") {
  const auto r = quad::integrate(
      quad::ComplexFn([](double x) { return std::exp(std::complex<double>(0, x)); }), 0.0, M_PI,
      1e-12);
  CHECK(std::abs(r.value - std::complex<double>(0.0, 2.0)) < 1e-12);
}

TEST_CASE("principal values") {
  // PV int_0^2 dw / (1 - w) = 0
  const auto a = quad::principal_value(RealFn([](double) { return 1.0; }), 0.0, 2.0, 1.0, 1e-12);
  CHECK(std::fabs(a.value) < 1e-14);
  // PV int_0^3 w / (1 - w) dw = -3 + log(1/2)
  const auto b = quad::principal_value(RealFn([](double w) { return w; }), 0.0, 3.0, 1.0, 1e-12);
  CHECK(b.value == doctest::Approx(-3.0 + std::log(0.5)).epsilon(1e-12));
  // PV int_{-1}^{1} exp(w) / (0.2 - w) dw against a subtracted direct integral
  const double x = 0.2;
  const auto c = quad::principal_value(RealFn([](double w) { return std::exp(w); }), -1.0, 1.0,
                                       x, 1e-12);
  const auto d = quad::integrate(
      RealFn([=](double w) { return w == x ? -std::exp(x) : (std::exp(w) - std::exp(x)) / (x - w); }),
      -1.0, 1.0, 1e-13);
  CHECK(c.value == doctest::Approx(d.value + std::exp(x) * std::log(1.2 / 0.8)).epsilon(1e-11));
}

TEST_CASE("Cauchy integral off the real line") {
  for (auto z : {std::complex<double>(0.5, 0.1), std::complex<double>(0.5, -1e-6),
                 std::complex<double>(2.0, 0.5)}) {
    // int_0^1 dw / (z - w) = log(z) - log(z - 1)
    const auto r = quad::cauchy_integral(
        RealFn([](double) { return 1.0; }),
        [](std::complex<double>) { return std::complex<double>(1.0); }, 0.0, 1.0, z, 1e-12);
    CHECK(std::abs(r.value - (std::log(z) - std::log(z - 1.0))) < 1e-11);
    // int_0^1 w dw / (z - w) = -1 + z (log z - log(z - 1))
    const auto s = quad::cauchy_integral(RealFn([](double w) { return w; }),
                                         [](std::complex<double> u) { return u; }, 0.0, 1.0, z,
                                         1e-12);
    CHECK(std::abs(s.value - (-1.0 + z * (std::log(z) - std::log(z - 1.0)))) < 1e-11);
  }
}

TEST_CASE("tolerance range and failure reporting") {
  CHECK_THROWS_AS(quad::check_tolerance(1e-3), ModelError);
  CHECK_THROWS_AS(quad::check_tolerance(1e-16), ModelError);
  CHECK_NOTHROW(quad::check_tolerance(1e-10));
  CHECK_THROWS_AS(
      quad::integrate(RealFn([](double x) { return std::sin(1.0 / x) / x; }), 1e-12, 1.0, 1e-13),
      QuadratureError);
}

TEST_CASE("Gauss-Legendre rules") {
  const auto& r = quad::gauss_legendre_10();
  REQUIRE(r.nodes.size() == 10);
  double s19 = 0.0, s18 = 0.0, w = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    s19 += r.weights[i] * std::pow(r.nodes[i], 19);
    s18 += r.weights[i] * std::pow(r.nodes[i], 18);
    w += r.weights[i];
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::fabs(s19) < 1e-15);
  CHECK(s18 == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
  const auto c = quad::composite_rule(0.0, 2.0, 7);
  REQUIRE(c.nodes.size() == 70);
  double e = 0.0;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) e += c.weights[i] * std::exp(c.nodes[i]);
  CHECK(e == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-14));
}
