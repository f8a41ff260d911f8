#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "qbm/error.hpp"
#include "qbm/model.hpp"

using namespace qbm;

TEST_CASE("band spacing conventions") {
  CHECK(band_spacing(31, 0.018, BandConvention::prose) == doctest::Approx(0.018 / 29));
  CHECK(band_spacing(31, 0.018, BandConvention::formula) == doctest::Approx(0.018 / 30));
  CHECK(parse_band_convention("formula") == BandConvention::formula);
  CHECK(to_string(BandConvention::prose) == "prose");
  CHECK_THROWS(parse_band_convention("other"));
}

TEST_CASE("default equidistant bath is symmetric about Omega") {
  PaperBathParams p;
  p.n_total = 32;
  const auto m = build_paper_model(p);
  REQUIRE(m.size() == 31);
  const auto w = m.bath_freqs();
  const auto g = m.couplings();
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i] + w[w.size() - 1 - i] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g[i] == doctest::Approx(g[w.size() - 1 - i]).epsilon(1e-15));
  }
  const auto& prov = *m.provenance();
  CHECK(prov.spacing == doctest::Approx(0.018 / 29));
  CHECK(prov.d_amp == doctest::Approx(prov.spacing));
  CHECK(prov.a_width == doctest::Approx(prov.spacing * 29 / 2));
  // the central oscillator sits at Omega and carries the peak coupling D
  CHECK(w[15] == doctest::Approx(1.0));
  CHECK(std::fabs(g[15]) == doctest::Approx(prov.d_amp));
}

TEST_CASE("lorentzian coupling profile") {
  const std::vector<double> w{0.9, 1.0, 1.1};
  const auto g = lorentzian_coupling(w, 1.0, 0.01, 0.1);
  CHECK(g[1] == doctest::Approx(0.01));
  CHECK(g[0] == doctest::Approx(0.005));
}

TEST_CASE("thermal occupancy") {
  CHECK(thermal_occupancy(1.0, 1.0) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)));
  CHECK(thermal_occupancy(std::numeric_limits<double>::infinity(), 1.0) == 0.0);
  const auto s = InitialState::thermal(build_paper_model({}));
  CHECK(s.kappa == 1.0);
  CHECK(s.bath_occupancies.size() == 31);
}

TEST_CASE("model invariants are enforced") {
  CHECK_THROWS_AS(SpectralModel(1.0, {1.0, 0.9}, {0.1, 0.1}), ModelError);
  CHECK_THROWS_AS(SpectralModel(1.0, {0.9, 1.1}, {0.1, 0.0}), ModelError);
  CHECK_THROWS_AS(SpectralModel(1.0, {0.9}, {0.1, 0.2}), ModelError);
  CHECK_THROWS_AS(SpectralModel(-1.0, {0.9}, {0.1}), ModelError);
}

TEST_CASE("model file parsing") {
  SUBCASE("round trip") {
    const auto m = build_paper_model({});
    std::stringstream ss;
    save_model(m, ss);
    const auto r = parse_model(ss);
    REQUIRE(r.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(r.bath_freqs()[i] == m.bath_freqs()[i]);
      CHECK(r.couplings()[i] == m.couplings()[i]);
    }
    CHECK(r.beta() == m.beta());
  }
  SUBCASE("zero temperature and comments") {
    std::istringstream in("omega_sub = 1.5  # subsystem\nbeta = inf\n[bath]\n1.4 0.01\n1.6 -0.02\n");
    const auto m = parse_model(in);
    CHECK(m.omega_sub() == 1.5);
    CHECK(std::isinf(m.beta()));
    CHECK(m.couplings()[1] == -0.02);
  }
  SUBCASE("errors carry the line") {
    std::istringstream a("[bath]\n1.1 0.01\n0.9 0.01\n");
    CHECK_THROWS_WITH_AS(parse_model(a, "m"), doctest::Contains("monotonicity"), ParseError);
    std::istringstream b("[bath]\n0.9 0\n");
    CHECK_THROWS_WITH_AS(parse_model(b, "m"), doctest::Contains("zero coupling"), ParseError);
    std::istringstream c("colour = red\n[bath]\n0.9 0.1\n");
    CHECK_THROWS_WITH_AS(parse_model(c, "m"), doctest::Contains("m:1"), ParseError);
    std::istringstream d("omega_sub = 1\n");
    CHECK_THROWS_AS(parse_model(d, "m"), ParseError);
    std::istringstream e("[bath]\n0.9 0.1 7\n");
    CHECK_THROWS_AS(parse_model(e, "m"), ParseError);
    std::istringstream f("[other]\n");
    CHECK_THROWS_AS(parse_model(f, "m"), ParseError);
  }
  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), ParseError);
}

TEST_CASE("positivity conditions") {
  PaperBathParams p;
  p.n_total = 32;
  const auto good = build_paper_model(p);
  const double a = good.provenance()->spacing;
  CHECK(validate_dissipation(good, a).all_pass());
  p.d_over_a = 20.0;
  const auto bad = build_paper_model(p);
  const auto r = validate_dissipation(bad, a);
  CHECK_FALSE(r.all_pass());
  REQUIRE(r.d_bound_ratio);
  CHECK(*r.d_bound_ratio == doctest::Approx(20.0 / std::sqrt(2.0)));
}
