#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "qbm/cli.hpp"
#include "qbm/continuum.hpp"
#include "qbm/dynamics.hpp"
#include "qbm/eigensolve.hpp"
#include "qbm/error.hpp"
#include "qbm/langevin.hpp"
#include "qbm/recurrence.hpp"
#include "qbm/simd/kernels.hpp"

namespace qbm::cli {

namespace {

Json real_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json_real(v);
}

SpectralModel make_model(Context& c, std::size_t n_total_override = 0) {
  const Options& o = c.opt;
  Json desc;
  std::optional<SpectralModel> model;
  if (o.model_text) {
    std::istringstream in(*o.model_text);
    auto m = parse_model(in, o.model_file.empty() ? "model" : o.model_file);
    ThermalParams th = m.thermal();
    if (o.beta) th.beta = *o.beta;
    if (o.kappa) th.kappa = *o.kappa;
    if (o.mass) th.mass = *o.mass;
    if (o.omega_sub)
      m = SpectralModel(*o.omega_sub, {m.bath_freqs().begin(), m.bath_freqs().end()},
                        {m.couplings().begin(), m.couplings().end()}, th);
    else
      m = m.with_thermal(th);
    desc["source"] = "file";
    desc["file"] = o.model_file;
    model = std::move(m);
  } else if (o.paper_defaults) {
    PaperBathParams p;
    p.n_total = n_total_override ? n_total_override : o.n_total;
    p.omega_sub = o.omega_sub.value_or(1.0);
    p.band_width = o.band_width;
    p.convention = parse_band_convention(o.convention);
    p.d_over_a = o.d_over_a;
    p.thermal = {o.beta.value_or(1.0), o.kappa.value_or(1.0), o.mass.value_or(1.0)};
    desc["source"] = "paper-defaults";
    model = build_paper_model(p);
  } else {
    throw UsageError("no model given: pass --paper-defaults, --model FILE or a config with a [bath] section");
  }
  const SpectralModel& m = *model;
  desc["omega_sub"] = m.omega_sub();
  desc["beta"] = real_or_inf(m.beta());
  desc["kappa"] = m.kappa();
  desc["mass"] = m.mass();
  desc["n_osc"] = m.size();
  desc["n_total"] = m.size() + 1;
  if (const auto& p = m.provenance()) {
    Json f;
    f["convention"] = to_string(p->convention);
    f["band_width"] = p->band_width;
    f["spacing"] = p->spacing;
    f["spacing_prose"] = band_spacing(p->n_osc, p->band_width, BandConvention::prose);
    f["spacing_formula"] = band_spacing(p->n_osc, p->band_width, BandConvention::formula);
    f["d_amp"] = p->d_amp;
    f["a_width"] = p->a_width;
    f["d_over_a"] = o.d_over_a;
    desc["equidistant_lorentzian"] = f;
    c.manifest["derived"]["A"] = p->spacing;
    c.manifest["derived"]["D"] = p->d_amp;
    c.manifest["derived"]["a"] = p->a_width;
    const auto cm = continuum_of(m);
    c.manifest["derived"]["gamma"] = width(cm);
    c.manifest["derived"]["delta_omega"] = pv_shift(cm, o.quad_tol);
  }
  c.manifest["model"] = desc;
  return *model;
}

NormalModes solve(Context& c, const SpectralModel& m) {
  SolveOptions so;
  so.rel_tol = c.opt.rel_tol;
  auto modes = solve_normal_modes(m, so);
  for (const auto& w : modes.warnings()) c.err << "warning: " << w << '\n';
  if (!modes.warnings().empty()) c.manifest["warnings"] = modes.warnings();
  return modes;
}

void record_poincare(Context& c, const PoincareEstimate& p) {
  c.manifest["derived"]["t_poincare"] = p.t_poincare;
  c.manifest["derived"]["min_gap"] = p.min_gap;
}

double sum_sq(std::span<const double> w) {
  std::vector<double> sq(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sq[i] = w[i] * w[i];
  return simd::pairwise_sum(sq.data(), sq.size());
}

// long-time level of a column after the initial decay
double column_plateau(const std::string& column, const NormalModes& modes,
                      const InitialState& init) {
  if (column == "P_surv") return sum_sq(modes.weights());
  if (column == "N_omega") return equilibrium_plateau(modes, init);
  return 0.0;
}

struct FitOutcome {
  std::optional<ExpFit> fit;
  std::string error;
  FitWindow window;
  double gamma_est = 0.0;
};

FitOutcome fit_decay(const NormalModes& modes, const InitialState& init, double t_poincare,
                     double plateau, std::size_t samples) {
  FitOutcome r;
  const auto& m = modes.model();
  r.gamma_est = discrete_width_estimate(m);
  r.window = default_fit_window(m.omega_sub(), t_poincare, r.gamma_est);
  if (!std::isfinite(r.gamma_est) || !(r.window.t_hi > r.window.t_lo)) {
    r.error = "no usable fit window";
    return r;
  }
  const auto grid = TimeGrid::span(r.window.t_lo, r.window.t_hi, std::max<std::size_t>(samples, 3));
  EvolveRequest req;
  req.observables = {"N_omega"};
  const auto ts = evolve_series(modes, init, grid, req);
  try {
    r.fit = fit_exponential(ts, "N_omega", r.window, plateau);
  } catch (const FitError& e) {
    r.error = e.what();
  }
  return r;
}

Json fit_json(const FitOutcome& f) {
  Json j;
  j["gamma_fit"] = f.fit ? json_real(f.fit->gamma) : Json(nullptr);
  j["residual"] = f.fit ? json_real(f.fit->residual) : Json(nullptr);
  return j;
}

void print_fit(std::ostream& out, const FitOutcome& f) {
  if (f.fit)
    out << "gamma_fit = " << format_real(f.fit->gamma) << " (rms log residual "
        << format_real(f.fit->residual) << ", window [" << format_real(f.window.t_lo) << ", "
        << format_real(f.window.t_hi) << "])\n";
  else
    out << "gamma_fit unavailable: " << f.error << '\n';
}

}  // namespace

int cmd_solve(Context& c) {
  const auto m = make_model(c);
  const auto modes = solve(c, m);
  const auto p = poincare_time(modes);
  record_poincare(c, p);

  Table t;
  t.header = {"nu", "alpha", "weight", "residual"};
  for (std::size_t nu = 0; nu < modes.size(); ++nu)
    t.rows.push_back({std::to_string(nu), format_real(modes.alphas()[nu]),
                      format_real(modes.weights()[nu]), format_real(modes.residuals()[nu])});
  write_table(c.file("modes.csv"), t);

  if (m.size() <= 512) {
    const auto cr = verify_closure(modes);
    Json j;
    j["completeness"] = cr.completeness;
    j["subsystem_bath"] = cr.subsystem_bath;
    j["bath_bath"] = cr.bath_bath;
    j["trace"] = cr.trace;
    j["first_moment"] = cr.first_moment;
    c.manifest["derived"]["closure"] = j;
  }
  c.out << "N + 1 = " << modes.size() << " modes\n"
        << "t_P = " << format_real(p.t_poincare) << " (min gap " << format_real(p.min_gap)
        << " between modes " << p.gap_argmin << " and " << p.gap_argmin + 1 << ")\n";
  return kOk;
}

int cmd_evolve(Context& c) {
  const auto m = make_model(c);
  const auto modes = solve(c, m);
  const auto init = InitialState::thermal(m);
  EvolveRequest req;
  req.observables = c.opt.obs.empty() ? std::vector<std::string>{"N_omega"} : c.opt.obs;
  req.initial = {c.opt.x0, c.opt.p0};
  try {
    validate_observables(modes, req.observables);
  } catch (const ModelError& e) {
    throw UsageError(e.what());
  }
  const auto grid = TimeGrid::span(c.opt.t0, c.opt.t_max.value_or(2000.0), c.opt.samples);
  const auto ts = evolve_series(modes, init, grid, req);

  write_series(c.file("series.csv"), ts.times(), ts.names, ts.columns, ts.valid);
  PlotSpec plot{"series.csv", "mean observables", "t", "value", 1, {}};
  for (std::size_t i = 0; i < ts.names.size(); ++i)
    plot.curves.push_back({static_cast<int>(i) + 2, ts.names[i]});
  write_gnuplot(c.file("evolve.gp"), plot);

  const auto p = poincare_time(modes);
  record_poincare(c, p);
  c.manifest["derived"]["plateau"] = equilibrium_plateau(modes, init);
  c.manifest["derived"]["asymptotic_plateau"] = asymptotic_plateau(modes, init);
  c.out << grid.count << " samples on [" << format_real(grid.t0) << ", "
        << format_real(grid.end()) << "]; t_P = " << format_real(p.t_poincare) << '\n'
        << "equilibrium plateau of N_omega = " << format_real(equilibrium_plateau(modes, init))
        << '\n';
  return kOk;
}

int cmd_langevin(Context& c) {
  const auto m = make_model(c);
  const auto modes = solve(c, m);
  const auto grid = TimeGrid::span(c.opt.t0, c.opt.t_max.value_or(500.0), c.opt.samples);
  const auto rows = langevin_series(modes, grid);

  Table t;
  t.header = {"t", "a", "b", "delta", "omega_sq", "gamma", "valid"};
  for (const auto& r : rows)
    t.rows.push_back({format_real(r.kernel.t), format_real(r.kernel.a), format_real(r.kernel.b),
                      format_real(r.kernel.delta),
                      r.coeffs.valid ? format_real(r.coeffs.omega_sq) : std::string{},
                      r.coeffs.valid ? format_real(r.coeffs.gamma) : std::string{},
                      r.coeffs.valid ? "1" : "0"});
  write_table(c.file("langevin.csv"), t);
  write_gnuplot(c.file("langevin.gp"), {"langevin.csv", "Langevin coefficients", "t", "value", 1,
                                        {{5, "Omega^2(t)"}, {6, "Gamma(t)"}, {4, "Delta(t)"}}});

  const auto rep = verify_langevin_ode(modes, grid);
  Json j;
  j["max_residual"] = rep.max_residual;
  j["max_abs_x"] = rep.max_abs_x;
  j["relative"] = rep.relative;
  j["valid_samples"] = rep.valid_samples;
  j["invalid_samples"] = rep.invalid_samples;
  c.manifest["derived"]["ode_check"] = j;
  c.out << "Langevin residual / (Omega^2 max|X|) = " << format_real(rep.relative) << " over "
        << rep.valid_samples << " valid samples (" << rep.invalid_samples << " flagged)\n";
  return kOk;
}

int cmd_recurrence(Context& c) {
  const auto m = make_model(c);
  const auto modes = solve(c, m);
  const auto init = InitialState::thermal(m);
  const auto p = poincare_time(modes);
  record_poincare(c, p);

  EvolveRequest req;
  req.observables = {c.opt.column};
  try {
    validate_observables(modes, req.observables);
  } catch (const ModelError& e) {
    throw UsageError(e.what());
  }
  const double horizon = c.opt.t_max.value_or(c.opt.horizon * p.t_poincare);
  const auto grid = TimeGrid::span(0.0, horizon, c.opt.samples);
  const auto ts = evolve_series(modes, init, grid, req);
  const double col_plateau = column_plateau(c.opt.column, modes, init);

  RevivalOptions ro;
  ro.threshold = c.opt.threshold;
  ro.plateau = col_plateau;
  ro.t_poincare = p.t_poincare;
  const auto peaks = detect_revivals(ts, c.opt.column, ro);

  const double plateau = equilibrium_plateau(modes, init);
  const auto fit = fit_decay(modes, init, p.t_poincare, plateau, c.opt.fit_samples);

  Json j;
  j["t_poincare"] = p.t_poincare;
  j["min_gap"] = p.min_gap;
  j["peaks"] = Json::array();
  for (const auto& pk : peaks) {
    Json e;
    e["t"] = pk.t;
    e["h"] = pk.height;
    e["w"] = pk.width;
    e["rise"] = pk.rise;
    e["fall"] = pk.fall;
    e["asymmetry"] = pk.asymmetry;
    j["peaks"].push_back(e);
  }
  const auto fj = fit_json(fit);
  j["gamma_fit"] = fj["gamma_fit"];
  j["residual"] = fj["residual"];
  j["plateau"] = plateau;
  j["asymptotic_plateau"] = asymptotic_plateau(modes, init);
  j["gap_argmin"] = p.gap_argmin;
  const auto spacing = peak_spacing(peaks);
  j["peak_spacing"] = spacing ? Json(*spacing) : Json(nullptr);
  j["column"] = c.opt.column;
  j["column_plateau"] = col_plateau;
  j["threshold"] = c.opt.threshold;
  j["fit_window"] = {fit.window.t_lo, fit.window.t_hi};
  j["gamma_estimate"] = json_real(fit.gamma_est);
  if (!fit.error.empty()) j["fit_error"] = fit.error;
  write_json(c.file("recurrence.json"), j);
  write_series(c.file("recurrence_series.csv"), ts.times(), ts.names, ts.columns, ts.valid);
  write_gnuplot(c.file("recurrence.gp"), {"recurrence_series.csv", "revivals", "t", c.opt.column,
                                          1, {{2, c.opt.column}}});

  c.manifest["derived"]["plateau"] = plateau;
  c.manifest["derived"]["gamma_fit"] = fj["gamma_fit"];
  c.out << "t_P = " << format_real(p.t_poincare) << "; " << peaks.size() << " revival(s)";
  if (spacing) c.out << ", mean spacing " << format_real(*spacing);
  c.out << '\n';
  print_fit(c.out, fit);
  return kOk;
}

int cmd_continuum(Context& c) {
  const Options& o = c.opt;
  ContinuumModel cm;
  if (o.density.empty()) {
    const auto m = make_model(c);
    cm = continuum_of(m);
  } else {
    const double omega = o.omega_sub.value_or(1.0);
    if (o.density == "lorentzian") cm.g_sq = LorentzianDensity{o.strength, o.center, o.width};
    else if (o.density == "ullersma") cm.g_sq = UllersmaDensity{o.c1, o.c2};
    else if (o.density == "linear") cm.g_sq = LinearDensity{o.slope};
    else if (o.density == "constant") cm.g_sq = ConstantDensity{o.value};
    else if (o.density == "zero") cm.g_sq = ZeroDensity{};
    else throw UsageError("unknown density '" + o.density + "'");
    cm.omega_sub = omega;
    cm.omega_min = 0.5 * omega;
    cm.omega_max = 1.5 * omega;
    cm.beta = o.beta.value_or(1.0);
    Json desc;
    desc["source"] = "density";
    desc["density"] = describe(cm.g_sq);
    c.manifest["model"] = desc;
  }
  if (o.omega_min) cm.omega_min = *o.omega_min;
  if (o.omega_max) cm.omega_max = *o.omega_max;
  cm.check();
  c.manifest["model"]["continuum"] = {{"density", describe(cm.g_sq)},
                                      {"omega_min", cm.omega_min},
                                      {"omega_max", real_or_inf(cm.omega_max)},
                                      {"omega_sub", cm.omega_sub},
                                      {"beta", real_or_inf(cm.beta)}};

  const auto cpc = validate_continuum(cm, o.quad_tol, o.cpc_delta);
  Json j;
  const bool decays = std::isfinite(cm.omega_max) && cm.g_sq_at(cm.omega_sub) > 0.0;
  std::optional<PoleEstimate> pole;
  if (decays) pole = pole_estimate(cm, o.quad_tol, !o.no_refine);
  j["delta_omega"] = pole ? json_real(pole->delta_omega) : Json(nullptr);
  j["gamma"] = width(cm);
  j["z0"] = pole ? Json{{"re", pole->z0.real()}, {"im", pole->z0.imag()}} : Json(nullptr);
  j["cpc"] = {{"left", real_or_inf(cpc.left_sum)},
              {"right", real_or_inf(cpc.right_sum)},
              {"pass", cpc.all_pass()},
              {"left_bound", real_or_inf(cpc.left_bound)},
              {"right_bound", real_or_inf(cpc.right_bound)},
              {"delta", cpc.delta},
              {"note", cpc.note}};
  if (pole && pole->refined)
    j["pole"] = {{"re", pole->refined->real()},
                 {"im", pole->refined->imag()},
                 {"newton_steps", pole->newton_steps}};
  if (decays) {
    j["weight_normalization"] = weight_normalization(cm, o.quad_tol);
    j["asymptotic_occupation"] = {{"weak_coupling", asymptotic_occupation(cm, true, o.quad_tol)},
                                  {"finite_coupling", asymptotic_occupation(cm, false, o.quad_tol)}};
  }

  if (o.series_t_max > 0.0) {
    if (!decays) throw UsageError("survival series needs a decaying model on a finite band");
    const ContinuumPropagator prop(cm, o.series_t_max, o.quad_tol);
    const auto grid = TimeGrid::span(0.0, o.series_t_max, std::max<std::size_t>(o.series_samples, 2));
    std::vector<double> ps(grid.count), amp(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
      const auto s = prop.amplitude(grid.at(i));
      ps[i] = std::norm(s);
      amp[i] = std::abs(s);
    }
    std::vector<double> t(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) t[i] = grid.at(i);
    write_series(c.file("survival.csv"), t, {"P_surv", "abs_amplitude"}, {ps, amp});
    write_gnuplot(c.file("survival.gp"), {"survival.csv", "continuum survival probability", "t",
                                          "P", 1, {{2, "P_surv"}}, false, true});
    j["series"] = {{"file", "survival.csv"},
                   {"nodes", prop.nodes()},
                   {"panel_width", prop.panel_width()},
                   {"normalization", prop.normalization()}};
  }
  write_json(c.file("continuum.json"), j);

  c.manifest["derived"]["gamma"] = j["gamma"];
  c.manifest["derived"]["delta_omega"] = j["delta_omega"];
  c.out << "Gamma = " << format_real(width(cm));
  if (pole)
    c.out << ", delta_Omega = " << format_real(pole->delta_omega) << ", z0 = "
          << format_real(pole->z0.real()) << " " << format_real(pole->z0.imag()) << "i";
  c.out << "\ncontinuum dissipation conditions: " << (cpc.all_pass() ? "pass" : "fail");
  if (!cpc.note.empty()) c.out << " (" << cpc.note << ")";
  c.out << '\n';
  return kOk;
}

int cmd_sweep(Context& c) {
  if (!c.opt.paper_defaults && !c.opt.model_text)
    throw UsageError("sweep runs over the equidistant family: pass --paper-defaults");
  if (c.opt.model_text) throw UsageError("sweep varies N and cannot use a fixed model file");
  if (c.opt.n_list.empty()) throw UsageError("--n-list is empty");

  Table t;
  t.header = {"n_total", "convention", "spacing", "t_poincare", "min_gap", "plateau",
              "gamma_fit", "fit_residual", "gamma_continuum", "status"};
  Json members = Json::array();
  bool failed = false;
  for (std::size_t n : c.opt.n_list) {
    std::vector<std::string> row{std::to_string(n), c.opt.convention};
    try {
      const auto m = make_model(c, n);
      const auto modes = solve(c, m);
      const auto init = InitialState::thermal(m);
      const auto p = poincare_time(modes);
      const double plateau = equilibrium_plateau(modes, init);
      const auto fit = fit_decay(modes, init, p.t_poincare, plateau, c.opt.fit_samples);
      const double gamma_c = width(continuum_of(m));
      row.insert(row.end(), {format_real(m.provenance()->spacing), format_real(p.t_poincare),
                             format_real(p.min_gap), format_real(plateau),
                             fit.fit ? format_real(fit.fit->gamma) : std::string{},
                             fit.fit ? format_real(fit.fit->residual) : std::string{},
                             format_real(gamma_c), fit.fit ? "ok" : "ok (no fit)"});
      if (c.opt.overlay) {
        const auto grid = TimeGrid::span(0.0, c.opt.horizon * p.t_poincare, c.opt.samples);
        EvolveRequest req;
        req.observables = {"P_surv"};
        const auto ts = evolve_series(modes, init, grid, req);
        std::vector<double> scaled(grid.count);
        for (std::size_t i = 0; i < grid.count; ++i) scaled[i] = grid.at(i) / p.t_poincare;
        const std::string name = "overlay_n" + std::to_string(n) + ".csv";
        write_series(c.file(name), ts.times(), {"t_over_tp", "P_surv"}, {scaled, ts.columns[0]});
      }
      c.out << "N + 1 = " << n << ": t_P = " << format_real(p.t_poincare) << ", plateau "
            << format_real(plateau) << '\n';
    } catch (const std::exception& e) {
      row.resize(2);
      row.insert(row.end(), 7, std::string{});
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      row.push_back("failed: " + msg);
      c.err << "sweep member N + 1 = " << n << " failed: " << e.what() << '\n';
      failed = true;
    }
    t.rows.push_back(row);
    if (failed) break;
  }
  c.manifest["model"]["n_list"] = c.opt.n_list;
  write_table(c.file("sweep.csv"), t);
  write_gnuplot(c.file("sweep.gp"), {"sweep.csv", "Poincare recurrence time", "N + 1", "t_P", 1,
                                     {{4, "t_P"}}, true, true});
  if (c.opt.overlay) {
    PlotSpec ov{"", "survival against t / t_P", "t / t_P", "P_surv", 2, {}};
    std::ostringstream script;
    script << "set datafile separator ','\nset key autotitle columnhead\n"
           << "set terminal pngcairo size 1000,640\nset output 'overlay.png'\n"
           << "set xlabel 't / t_P'\nset ylabel 'P_surv'\nplot ";
    bool first = true;
    for (const auto& r : t.rows) {
      if (r.back().rfind("failed", 0) == 0) continue;
      script << (first ? "" : ", \\\n     ") << "'overlay_n" << r[0]
             << ".csv' using 2:3 with lines title 'N+1=" << r[0] << "'";
      first = false;
    }
    script << '\n';
    std::ofstream f(c.file("overlay.gp"));
    f << script.str();
  }
  if (failed) throw ValidationFailure("sweep aborted; partial results flagged in sweep.csv");
  return kOk;
}

int cmd_validate(Context& c) {
  const auto m = make_model(c);
  double delta = 0.0;
  if (c.opt.delta) {
    delta = *c.opt.delta;
  } else if (m.size() > 1) {
    const auto w = m.bath_freqs();
    delta = w[1] - w[0];
    for (std::size_t i = 1; i + 1 < w.size(); ++i) delta = std::min(delta, w[i + 1] - w[i]);
  } else {
    delta = 1e-3 * m.omega_sub();
  }
  const auto r = validate_dissipation(m, delta);
  Json j;
  j["delta"] = r.delta;
  j["left_sum"] = r.left_sum;
  j["left_bound"] = r.left_bound;
  j["right_sum"] = r.right_sum;
  j["right_bound"] = r.right_bound;
  j["passes"] = {r.passes[0], r.passes[1]};
  j["d_bound_ratio"] = r.d_bound_ratio ? Json(*r.d_bound_ratio) : Json(nullptr);
  j["pass"] = r.all_pass();
  write_json(c.file("validate.json"), j);
  c.manifest["derived"]["validity"] = j;

  auto line = [&](const char* name, double sum, double bound, bool ok) {
    c.out << name << " positivity condition: " << format_real(sum) << " < " << format_real(bound)
          << (ok ? "  PASS" : "  FAIL") << '\n';
  };
  line("left ", r.left_sum, r.left_bound, r.passes[0]);
  line("right", r.right_sum, r.right_bound, r.passes[1]);
  if (r.d_bound_ratio)
    c.out << "D / (sqrt(2) A) = " << format_real(*r.d_bound_ratio)
          << (*r.d_bound_ratio > 1.0 ? " (above the conservative bound)" : "") << '\n';
  if (!r.all_pass())
    throw ValidationFailure(
        "the positivity conditions of the Hamiltonian are violated; the model cannot describe "
        "dissipation");
  return kOk;
}

}  // namespace qbm::cli
