#include <doctest.h>

#include <cmath>

#include "qbm/error.hpp"
#include "qbm/recurrence.hpp"

using namespace qbm;

namespace {

TimeSeries synthetic(const TimeGrid& grid, double (*f)(double)) {
  TimeSeries ts;
  ts.grid = grid;
  ts.names = {"y"};
  ts.columns.resize(1);
  for (std::size_t i = 0; i < grid.count; ++i) ts.columns[0].push_back(f(grid.at(i)));
  ts.valid.assign(grid.count, 1);
  return ts;
}

NormalModes paper_modes(std::size_t n_total) {
  PaperBathParams p;
  p.n_total = n_total;
  return solve_normal_modes(build_paper_model(p));
}

}  // namespace

TEST_CASE("exponential fit recovers a clean decay") {
  const auto ts = synthetic(TimeGrid::span(0.0, 100.0, 401),
                            [](double t) { return 0.3 + 2.0 * std::exp(-0.05 * t); });
  const auto fit = fit_exponential(ts, "y", {10.0, 60.0}, 0.3);
  CHECK(fit.gamma == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(fit.amplitude == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(fit.residual < 1e-9);
  CHECK(fit.points == 201);
}

TEST_CASE("exponential fit rejects bad input") {
  const auto ts = synthetic(TimeGrid::span(0.0, 10.0, 11), [](double t) { return 1.0 - 0.1 * t; });
  CHECK_THROWS_AS(fit_exponential(ts, "y", {0.0, 10.0}, 0.5), FitError);
  CHECK_THROWS_AS(fit_exponential(ts, "y", {0.0, 1.5}, 0.0), FitError);
  CHECK_THROWS_AS(fit_exponential(ts, "y", {20.0, 30.0}, 0.0), FitError);
}

TEST_CASE("default fit window") {
  const auto w = default_fit_window(1.0, 1e4, 0.01);
  CHECK(w.t_lo == doctest::Approx(3.0));
  CHECK(w.t_hi == doctest::Approx(500.0));
  CHECK(default_fit_window(1.0, 1e3, 1e-4).t_hi == doctest::Approx(200.0));
}

TEST_CASE("revival detection on synthetic bumps") {
  // decay from 1 to 0.2, then bumps at 300 and 600 of height 0.9 and 0.7
  const auto ts = synthetic(TimeGrid::span(0.0, 800.0, 8001), [](double t) {
    return 0.2 + 0.8 * std::exp(-t / 10.0) + 0.7 * std::exp(-std::pow((t - 300.0) / 20.0, 2)) +
           0.5 * std::exp(-std::pow((t - 600.0) / 30.0, 2));
  });
  RevivalOptions o;
  o.plateau = 0.2;
  o.min_separation = 100.0;
  const auto peaks = detect_revivals(ts, "y", o);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].t == doctest::Approx(300.0).epsilon(1e-4));
  CHECK(peaks[0].height == doctest::Approx(0.9).epsilon(1e-4));
  CHECK(peaks[0].width == doctest::Approx(40.0 * std::sqrt(std::log(2.0))).epsilon(1e-3));
  CHECK(std::fabs(peaks[0].asymmetry) < 1e-3);
  CHECK(peaks[1].t == doctest::Approx(600.0).epsilon(1e-4));
  REQUIRE(peak_spacing(peaks));
  CHECK(*peak_spacing(peaks) == doctest::Approx(300.0).epsilon(1e-4));
  o.threshold = 0.9;
  CHECK(detect_revivals(ts, "y", o).empty());
  CHECK_FALSE(peak_spacing({}));
}

TEST_CASE("Poincare time is set by the closest normal modes") {
  const auto modes = paper_modes(32);
  const auto p = poincare_time(modes);
  const auto a = modes.alphas();
  CHECK(p.min_gap == doctest::Approx(a[p.gap_argmin + 1] - a[p.gap_argmin]));
  CHECK(p.t_poincare == doctest::Approx(2.0 * M_PI / p.min_gap));
  CHECK(p.t_poincare == doctest::Approx(10807.0).epsilon(1e-3));
}

TEST_CASE("survival revives near multiples of the recurrence time") {
  const auto modes = paper_modes(32);
  const auto init = InitialState::thermal(modes.model());
  const auto p = poincare_time(modes);
  EvolveRequest req;
  req.observables = {"P_surv"};
  const auto ts = evolve_series(modes, init, TimeGrid::span(0.0, 3.0 * p.t_poincare, 6001), req);
  double w2 = 0.0;
  for (double w : modes.weights()) w2 += w * w;
  RevivalOptions o;
  o.plateau = w2;
  o.t_poincare = p.t_poincare;
  const auto peaks = detect_revivals(ts, "P_surv", o);
  REQUIRE(peaks.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::fabs(peaks[k].t / p.t_poincare - (k + 1.0)) < 0.05);
    CHECK(peaks[k].height < 1.0);
  }
  CHECK(peaks[0].height > peaks[2].height);
}

TEST_CASE("plateaus of the subsystem occupation") {
  const auto modes = paper_modes(100);
  const auto init = InitialState::thermal(modes.model());
  const double nbar = 1.0 / (std::exp(1.0) - 1.0);
  CHECK(equilibrium_plateau(modes, init) == doctest::Approx(nbar).epsilon(1e-3));
  CHECK(asymptotic_plateau(modes, init) < equilibrium_plateau(modes, init));
  CHECK(discrete_width_estimate(modes.model()) ==
        doctest::Approx(2.0 * M_PI * modes.model().provenance()->spacing).epsilon(1e-12));
}
