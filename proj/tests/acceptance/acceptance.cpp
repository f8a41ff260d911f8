// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/continuum.hpp"
#include "qbm/dynamics.hpp"
#include "qbm/eigensolve.hpp"
#include "qbm/error.hpp"
#include "qbm/langevin.hpp"
#include "qbm/recurrence.hpp"
#include "support/oracles.hpp"

using namespace qbm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SpectralModel paper(std::size_t n_total, BandConvention c = BandConvention::prose) {
  PaperBathParams p;
  p.n_total = n_total;
  p.convention = c;
  return build_paper_model(p);
}

Outcome table_one() {
  const std::size_t sizes[] = {10, 32, 100, 500};
  const double table[] = {3370, 11190, 37311, 177994};
  std::ostringstream d;
  std::vector<std::string> passing;
  const auto t0 = std::chrono::steady_clock::now();
  for (auto c : {BandConvention::prose, BandConvention::formula}) {
    bool ok = true;
    d << to_string(c) << ":";
    for (int i = 0; i < 4; ++i) {
      const double tp = poincare_time(solve_normal_modes(paper(sizes[i], c))).t_poincare;
      const double rel = tp / table[i] - 1.0;
      ok = ok && std::fabs(rel) <= 0.10;
      d << fmt(" %.0f", tp) << fmt("(%+.1f%%)", 100 * rel);
    }
    d << "; ";
    if (ok) passing.push_back(to_string(c));
  }
  const double dt = seconds_since(t0);
  d << "passing convention(s):";
  for (const auto& s : passing) d << ' ' << s;
  if (passing.empty()) d << " none";
  d << fmt("; %.2f s", dt);
  return {!passing.empty() && dt < 10.0, d.str()};
}

Outcome plateau() {
  const auto m = paper(500);
  const auto modes = solve_normal_modes(m);
  const auto init = InitialState::thermal(m);
  const double tp = poincare_time(modes).t_poincare;
  EvolveRequest req;
  req.observables = {"N_omega"};
  const auto ts = evolve_series(modes, init, TimeGrid::span(500.0, 0.5 * tp, 20001), req);
  const auto& y = ts.columns[0];
  // trapezoidal time average
  double s = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) s += 0.5 * (y[i] + y[i - 1]);
  const double avg = s / static_cast<double>(y.size() - 1);
  return {std::fabs(avg - 0.582) <= 0.05,
          fmt("time average %.5f", avg) + fmt(" over [500, %.0f]", 0.5 * tp) +
              fmt("; equilibrium plateau %.5f", equilibrium_plateau(modes, init))};
}

Outcome identities() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> size(1, 64);
  std::vector<SpectralModel> models{paper(32)};
  for (int i = 0; i < 60; ++i) models.push_back(testing::random_model(rng, size(rng)));
  bool interlace = true;
  double completeness = 0, trace = 0, closure = 0, oracle = 0;
  for (const auto& m : models) {
    const auto modes = solve_normal_modes(m);
    const auto a = modes.alphas();
    const auto w = m.bath_freqs();
    for (std::size_t n = 0; n < w.size(); ++n) interlace = interlace && a[n] < w[n] && w[n] < a[n + 1];
    const auto c = verify_closure(modes);
    completeness = std::max(completeness, c.completeness);
    trace = std::max(trace, c.trace);
    closure = std::max(closure, c.max_closure());
    oracle = std::max(oracle, testing::max_abs_diff(a, dense_oracle(m).alphas()) / m.omega_sub());
  }
  const bool ok = interlace && completeness < 1e-10 && trace < 1e-10 && closure < 1e-10 &&
                  oracle < 1e-10;
  std::ostringstream d;
  d << models.size() << " models; interlacing " << (interlace ? "exact" : "VIOLATED")
    << fmt("; completeness %.1e", completeness) << fmt(", trace %.1e", trace)
    << fmt(", closure %.1e", closure) << fmt(", dense oracle %.1e Omega", oracle);
  return {ok, d.str()};
}

Outcome conservation() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> time(0.0, 1e5);
  double norm = 0.0, total = 0.0;
  for (const auto& m : {paper(32), paper(100), testing::random_model(rng, 40)}) {
    const auto modes = solve_normal_modes(m);
    const auto init = InitialState::thermal(m);
    const double n0 = total_quanta(modes, init, 0.0);
    for (int k = 0; k < 100; ++k) {
      const double t = time(rng);
      const auto row = subsystem_bath_probabilities(modes, t);
      norm = std::max(norm, std::fabs(p_omega_omega(modes, t) +
                                      std::accumulate(row.begin(), row.end(), 0.0) - 1.0));
      const std::size_t n = 1 + k % m.size();
      const auto br = bath_row_probabilities(modes, n, t);
      norm = std::max(norm, std::fabs(p_omega_n(modes, n, t) +
                                      std::accumulate(br.begin(), br.end(), 0.0) - 1.0));
      if (k % 10 == 0)
        total = std::max(total, std::fabs(total_quanta(modes, init, t) / n0 - 1.0));
    }
  }
  return {norm < 1e-10 && total < 1e-9,
          fmt("max normalisation defect %.1e", norm) + fmt("; total quanta drift %.1e", total)};
}

Outcome rabi() {
  const double g = 0.05;
  const auto modes = solve_normal_modes(SpectralModel(1.0, {1.0}, {g}));
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double t = 10 * M_PI / g * i / 20000.0;
    worst = std::max(worst, std::fabs(p_omega_omega(modes, t) - std::pow(std::cos(g * t), 2)));
  }
  return {worst < 1e-12, fmt("max |P - cos^2(gt)| = %.1e", worst)};
}

Outcome double_sum() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> time(0.0, 1e4);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 16; ++n) {
    const auto m = testing::random_model(rng, n);
    const auto modes = solve_normal_modes(m);
    const auto init = InitialState::thermal(m);
    for (int k = 0; k < 20; ++k) {
      const double t = time(rng);
      const double ref = testing::n_omega_double_sum(modes, init, t);
      worst = std::max(worst, std::fabs(mean_subsystem_occupation(modes, init, t) - ref) /
                                  std::fabs(ref));
    }
  }
  return {worst < 1e-11, fmt("max relative difference %.1e over 16 models x 20 times", worst)};
}

Outcome langevin() {
  const auto modes = solve_normal_modes(paper(32));
  const auto rep = verify_langevin_ode(modes, TimeGrid::span(0.0, 2000.0, 8001));
  const NormalModes bare(SpectralModel(1.0, {2.0}, {1e-3}), {1.0, 2.0}, {1.0, 0.0});
  bool exact = true;
  for (double t : {0.1, 1.0, 10.0, 1000.0}) {
    const auto c = langevin_coefficients(bare, t);
    exact = exact && c.valid && c.gamma == 0.0 && c.omega_sq == 1.0;
  }
  return {rep.relative < 1e-8 && exact && rep.valid_samples > 0,
          fmt("residual / (Omega^2 max|X|) = %.1e", rep.relative) +
              fmt(" over %.0f valid samples", static_cast<double>(rep.valid_samples)) +
              "; decoupled limit " + (exact ? "exact" : "NOT exact")};
}

Outcome decay_rate() {
  const auto m = paper(500);
  const auto modes = solve_normal_modes(m);
  const auto init = InitialState::thermal(m);
  const double tp = poincare_time(modes).t_poincare;
  const double gamma = width(continuum_of(m));
  const double plat = equilibrium_plateau(modes, init);
  const auto window = default_fit_window(1.0, tp, discrete_width_estimate(m));
  EvolveRequest req;
  req.observables = {"N_omega", "X_mean", "P_tilde_mean"};
  const auto ts = evolve_series(modes, init, TimeGrid::span(window.t_lo, window.t_hi, 4001), req);
  const auto fit = fit_exponential(ts, "N_omega", window, plat);

  // envelope |<X> + i <P~>| of the mean position, fitted over the first two lifetimes
  TimeSeries env = ts;
  env.names = {"envelope"};
  env.columns.assign(1, {});
  for (std::size_t i = 0; i < ts.size(); ++i)
    env.columns[0].push_back(std::hypot(ts.columns[1][i], ts.columns[2][i]));
  const FitWindow ew{window.t_lo, std::min(window.t_hi, 2.0 / gamma)};
  const auto efit = fit_exponential(env, "envelope", ew, 0.0);

  const double r1 = fit.gamma / gamma, r2 = efit.gamma / (gamma / 2);
  return {std::fabs(r1 - 1.0) <= 0.15 && std::fabs(r2 - 1.0) <= 0.15,
          fmt("gamma_fit / Gamma = %.4f", r1) + fmt(" (Gamma = %.4e)", gamma) +
              fmt("; envelope rate / (Gamma/2) = %.4f", r2)};
}

Outcome continuum() {
  constexpr double tol = 1e-10;
  ContinuumModel cm;
  cm.g_sq = LorentzianDensity{0.005, 1.0, 0.1};
  cm.omega_min = 0.5;
  cm.omega_max = 1.5;
  const double shift = std::fabs(pole_estimate(cm, tol, false).delta_omega);
  const ContinuumPropagator prop(cm, 1.0, tol);
  const double zeno = zeno_fit(prop, 1e-3, 1e-1).exponent;

  ContinuumModel ull;
  ull.g_sq = UllersmaDensity{0.1, 1.0};
  ull.omega_min = 1e-4;
  ull.omega_max = 2.0;
  const double slope = khalfin_tail(ull, 1500.0, 6000.0, tol).fit.exponent;

  const double occ = asymptotic_occupation(cm, true, tol);
  const double nbar = 1.0 / std::expm1(1.0);
  const bool ok = shift < 1e-8 && std::fabs(zeno - 2.0) <= 0.05 && std::fabs(slope + 2.0) <= 0.2 &&
                  std::fabs(occ - nbar) <= tol * nbar;
  return {ok, fmt("|dOmega| = %.1e", shift) + fmt("; Zeno exponent %.4f", zeno) +
                  fmt("; Khalfin slope %.4f", slope) + fmt("; weak-coupling n = %.12f", occ) +
                  fmt(" vs %.12f", nbar)};
}

Outcome performance() {
  const auto m = paper(4096);
  const auto t0 = std::chrono::steady_clock::now();
  const auto modes = solve_normal_modes(m);
  const double dt = seconds_since(t0);
  const auto w = modes.weights();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const bool complete = std::fabs(total - 1.0) < 1e-10;

  const auto mid = paper(1024);
  auto t1 = std::chrono::steady_clock::now();
  solve_normal_modes(mid);
  const double secular_1k = seconds_since(t1);
  t1 = std::chrono::steady_clock::now();
  dense_oracle(mid);
  const double dense_1k = seconds_since(t1);
  bool capped = false;
  try {
    dense_oracle(paper(kDenseOracleMaxN + 2));
  } catch (const ModelError&) {
    capped = true;
  }
  return {dt < 5.0 && complete && capped,
          fmt("N + 1 = 4096 solve %.3f s", dt) + fmt("; N + 1 = 1024 secular %.4f s", secular_1k) +
              fmt(" vs dense %.3f s", dense_1k) + "; dense oracle " +
              (capped ? "capped" : "NOT capped")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"reference recurrence times", table_one},
      {"equilibrium plateau", plateau},
      {"exact-solution identities", identities},
      {"normalisation and conservation", conservation},
      {"Rabi oracle", rabi},
      {"double-sum equivalence", double_sum},
      {"Langevin identity", langevin},
      {"decay-rate consistency", decay_rate},
      {"continuum regime checks", continuum},
      {"performance", performance},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
