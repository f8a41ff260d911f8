#include "qbm/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qbm/error.hpp"
#include "qbm/simd/kernels.hpp"

namespace qbm {

PoincareEstimate poincare_time(const NormalModes& modes) {
  PoincareEstimate p;
  p.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < modes.size(); ++i) {
    const double gap = modes.mode_gap(i);
    if (gap < p.min_gap) {
      p.min_gap = gap;
      p.gap_argmin = i;
    }
  }
  p.t_poincare = 2.0 * std::numbers::pi / p.min_gap;
  return p;
}

namespace {

// time where y crosses `level` between samples i and j (adjacent)
double crossing(const TimeSeries& s, const std::vector<double>& y, std::size_t i, std::size_t j,
                double level) {
  const double ti = s.grid.at(i), tj = s.grid.at(j);
  const double d = y[j] - y[i];
  if (d == 0.0) return 0.5 * (ti + tj);
  return ti + (level - y[i]) / d * (tj - ti);
}

}  // namespace

std::vector<Peak> detect_revivals(const TimeSeries& series, const std::string& column,
                                  const RevivalOptions& opts) {
  const auto& y = series.column(column);
  const std::size_t n = y.size();
  if (!(opts.threshold > 0.0 && opts.threshold < 1.0))
    throw ModelError("revival threshold must lie in (0, 1)");
  std::vector<Peak> found;
  if (n < 3) return found;

  const double plateau = opts.plateau;
  const double level = plateau + opts.threshold * (y[0] - plateau);
  const double dt = series.grid.dt;
  double min_sep = 0.0;
  if (opts.min_separation) min_sep = *opts.min_separation;
  else if (opts.t_poincare) min_sep = 0.25 * *opts.t_poincare;

  auto ok = [&](std::size_t i) { return series.valid.empty() || series.valid[i]; };

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!ok(i - 1) || !ok(i) || !ok(i + 1)) continue;
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > level)) continue;
    Peak p;
    const double ym = y[i - 1], y0 = y[i], yp = y[i + 1];
    const double curv = ym - 2.0 * y0 + yp;
    double shift = 0.0;
    if (curv < 0.0) shift = std::clamp(0.5 * (ym - yp) / curv, -0.5, 0.5);
    p.t = series.grid.at(i) + shift * dt;
    p.height = y0 - 0.25 * (ym - yp) * shift;

    const double half = plateau + 0.5 * (p.height - plateau);
    std::size_t l = i;
    while (l > 0 && y[l - 1] > half) --l;
    std::size_t r = i;
    while (r + 1 < n && y[r + 1] > half) ++r;
    const double tl = l > 0 ? crossing(series, y, l - 1, l, half) : series.grid.at(0);
    const double tr = r + 1 < n ? crossing(series, y, r, r + 1, half) : series.grid.end();
    p.rise = p.t - tl;
    p.fall = tr - p.t;
    p.width = tr - tl;
    p.asymmetry = p.width > 0.0 ? (p.fall - p.rise) / p.width : 0.0;
    found.push_back(p);
  }

  std::vector<std::size_t> order(found.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return found[a].height > found[b].height; });
  std::vector<Peak> kept;
  for (std::size_t idx : order) {
    const auto& cand = found[idx];
    bool clash = false;
    for (const auto& k : kept)
      if (std::fabs(k.t - cand.t) < min_sep) clash = true;
    if (!clash) kept.push_back(cand);
  }
  std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) { return a.t < b.t; });
  return kept;
}

std::optional<double> peak_spacing(const std::vector<Peak>& peaks) {
  if (peaks.size() < 2) return std::nullopt;
  return (peaks.back().t - peaks.front().t) / static_cast<double>(peaks.size() - 1);
}

ExpFit fit_exponential(const TimeSeries& series, const std::string& column, FitWindow window,
                       double plateau) {
  const auto& y = series.column(column);
  if (!(window.t_hi > window.t_lo)) throw FitError("fit window is empty");
  if (window.t_lo < series.grid.t0 || window.t_hi > series.grid.end())
    throw FitError("fit window lies outside the time grid");

  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = series.grid.at(i);
    if (t < window.t_lo || t > window.t_hi) continue;
    if (!series.valid.empty() && !series.valid[i]) continue;
    const double v = y[i] - plateau;
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "window rejected: " << column << " - plateau = " << v << " at t = " << t;
      throw FitError(os.str());
    }
    ts.push_back(t);
    ls.push_back(std::log(v));
  }
  if (ts.size() < 3) throw FitError("fit window holds fewer than three samples");

  // centred normal equations
  const double m = static_cast<double>(ts.size());
  const double tbar = simd::pairwise_sum(ts.data(), ts.size()) / m;
  const double lbar = simd::pairwise_sum(ls.data(), ls.size()) / m;
  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tbar) * (ts[i] - tbar);
    stl += (ts[i] - tbar) * (ls[i] - lbar);
  }
  const double slope = stl / stt;
  const double icpt = lbar - slope * tbar;
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ls[i] - (icpt + slope * ts[i]);
    ss += r * r;
  }
  ExpFit f;
  f.gamma = -slope;
  f.amplitude = std::exp(icpt);
  f.residual = std::sqrt(ss / m);
  f.points = ts.size();
  f.window = window;
  return f;
}

FitWindow default_fit_window(double omega_sub, double t_poincare, double gamma_est) {
  FitWindow w;
  w.t_lo = 3.0 / omega_sub;
  w.t_hi = std::min(0.2 * t_poincare, 5.0 / gamma_est);
  return w;
}

double discrete_width_estimate(const SpectralModel& model) {
  const auto w = model.bath_freqs();
  const auto g2 = model.couplings_sq();
  const double omega = model.omega_sub();
  std::size_t c = 0;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (std::fabs(w[i] - omega) < std::fabs(w[c] - omega)) c = i;
  double dw = 0.0;
  if (w.size() == 1) return std::numeric_limits<double>::quiet_NaN();
  if (c == 0) dw = w[1] - w[0];
  else if (c + 1 == w.size()) dw = w[c] - w[c - 1];
  else dw = 0.5 * (w[c + 1] - w[c - 1]);
  return 2.0 * std::numbers::pi * g2[c] / dw;
}

double asymptotic_plateau(const NormalModes& modes, const InitialState& init) {
  const auto theta = long_time_transfer(modes);
  std::vector<double> terms(theta.size());
  for (std::size_t n = 0; n < theta.size(); ++n) terms[n] = theta[n] * init.bath_occupancies.at(n);
  return simd::pairwise_sum(terms.data(), terms.size());
}

double equilibrium_plateau(const NormalModes& modes, const InitialState& init) {
  const auto theta = long_time_transfer(modes);
  const double norm = simd::pairwise_sum(theta.data(), theta.size());
  return asymptotic_plateau(modes, init) / norm;
}

}  // namespace qbm
