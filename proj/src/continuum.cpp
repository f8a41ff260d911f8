#include "qbm/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/simd/kernels.hpp"

namespace qbm {

namespace {

constexpr double kPi = std::numbers::pi;

template <class T>
T eval(const SpectralDensity& d, T w) {
  return std::visit(
      [&](const auto& s) -> T {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LorentzianDensity>) {
          const T x = w - s.center;
          return s.strength * s.width * s.width / (s.width * s.width + x * x);
        } else if constexpr (std::is_same_v<S, UllersmaDensity>) {
          return s.c1 * s.c1 * w * w / (s.c2 * s.c2 + w * w);
        } else if constexpr (std::is_same_v<S, LinearDensity>) {
          return s.slope * w;
        } else if constexpr (std::is_same_v<S, ConstantDensity>) {
          return T(s.value);
        } else if constexpr (std::is_same_v<S, ZeroDensity>) {
          return T(0.0);
        } else {
          const T x = w - s.center;
          const T g = s.d_amp * s.a_width * s.a_width / (s.a_width * s.a_width + x * x);
          return g * g / s.spacing;
        }
      },
      d);
}

// nested PV integrals need to be tighter than the outer rule
double inner_tol(double tol) { return std::max(tol * 1e-2, 1.01e-14); }

std::vector<double> peak_breaks(const ContinuumModel& cm) {
  std::vector<double> b{cm.omega_sub};
  const double g = 2.0 * kPi * cm.g_sq_at(cm.omega_sub);
  if (g > 0.0)
    for (double k : {0.5, 2.0, 8.0, 32.0, 128.0}) {
      b.push_back(cm.omega_sub - k * g);
      b.push_back(cm.omega_sub + k * g);
    }
  return b;
}

}  // namespace

double density(const SpectralDensity& d, double w) { return eval<double>(d, w); }

std::complex<double> density(const SpectralDensity& d, std::complex<double> z) {
  return eval<std::complex<double>>(d, z);
}

std::string describe(const SpectralDensity& d) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LorentzianDensity>)
          os << "lorentzian(strength=" << s.strength << ", center=" << s.center
             << ", width=" << s.width << ")";
        else if constexpr (std::is_same_v<S, UllersmaDensity>)
          os << "ullersma(c1=" << s.c1 << ", c2=" << s.c2 << ")";
        else if constexpr (std::is_same_v<S, LinearDensity>)
          os << "linear(slope=" << s.slope << ")";
        else if constexpr (std::is_same_v<S, ConstantDensity>)
          os << "constant(value=" << s.value << ")";
        else if constexpr (std::is_same_v<S, ZeroDensity>)
          os << "zero";
        else
          os << "discrete_lorentzian(D=" << s.d_amp << ", a=" << s.a_width
             << ", center=" << s.center << ", A=" << s.spacing << ")";
      },
      d);
  return os.str();
}

ContinuumModel continuum_of(const SpectralModel& model) {
  const auto& p = model.provenance();
  if (!p) throw ModelError("continuum correspondence needs an equidistant Lorentzian bath");
  ContinuumModel cm;
  cm.g_sq = DiscreteLorentzianDensity{p->d_amp, p->a_width, model.omega_sub(), p->spacing};
  cm.omega_min = model.bath_freqs().front() - 0.5 * p->spacing;
  cm.omega_max = model.bath_freqs().back() + 0.5 * p->spacing;
  cm.omega_sub = model.omega_sub();
  cm.beta = model.beta();
  return cm;
}

void ContinuumModel::check() const {
  if (!std::isfinite(omega_sub) || !std::isfinite(omega_min) || std::isnan(omega_max))
    throw ModelError("continuum frequencies must be finite");
  if (!(omega_min < omega_sub && omega_sub < omega_max))
    throw ModelError("continuum model needs omega_min < Omega < omega_max");
  if (!(beta > 0.0)) throw ModelError("beta must be positive");
  if (g_sq_at(omega_sub) < 0.0) throw ModelError("spectral density must be non-negative");
}

void ContinuumModel::check_decaying() const {
  check();
  if (!std::isfinite(omega_max)) throw ModelError("this operation needs a finite band");
  if (!(g_sq_at(omega_sub) > 0.0))
    throw ModelError("g^2(Omega) must be positive for the subsystem to decay");
}

double pv_integral(const ContinuumModel& cm, double x, double quad_tol) {
  quad::check_tolerance(quad_tol);
  auto f = [&](double w) { return cm.g_sq_at(w); };
  return quad::principal_value(f, cm.omega_min, cm.omega_max, x, quad_tol).value;
}

double pv_shift(const ContinuumModel& cm, double quad_tol) {
  cm.check();
  if (!std::isfinite(cm.omega_max)) throw ModelError("frequency shift needs a finite band");
  return pv_integral(cm, cm.omega_sub, quad_tol);
}

double width(const ContinuumModel& cm) {
  cm.check();
  return 2.0 * kPi * cm.g_sq_at(cm.omega_sub);
}

std::complex<double> resolvent_boundary(const ContinuumModel& cm, double alpha, double quad_tol,
                                        Side side) {
  cm.check();
  if (!(alpha > cm.omega_min && alpha < cm.omega_max))
    throw ModelError("boundary value requested outside the band");
  const double re = alpha - cm.omega_sub - pv_integral(cm, alpha, quad_tol);
  const double im = kPi * cm.g_sq_at(alpha);
  return {re, side == Side::upper ? im : -im};
}

std::complex<double> resolvent_second_sheet(const ContinuumModel& cm, std::complex<double> z,
                                            double quad_tol) {
  cm.check();
  quad::check_tolerance(quad_tol);
  if (z.imag() == 0.0) return resolvent_boundary(cm, z.real(), quad_tol, Side::upper);
  auto f = [&](double w) { return cm.g_sq_at(w); };
  auto fz = [&](std::complex<double> s) { return density(cm.g_sq, s); };
  const auto integral = quad::cauchy_integral(f, fz, cm.omega_min, cm.omega_max, z, quad_tol);
  std::complex<double> r = z - cm.omega_sub - integral.value;
  if (z.imag() < 0.0) r += std::complex<double>(0.0, 2.0 * kPi) * fz(z);
  return r;
}

PoleEstimate pole_estimate(const ContinuumModel& cm, double quad_tol, bool refine) {
  cm.check_decaying();
  PoleEstimate p;
  p.delta_omega = pv_shift(cm, quad_tol);
  p.gamma = width(cm);
  p.z0 = {cm.omega_sub + p.delta_omega, -0.5 * p.gamma};

  const double tol = inner_tol(quad_tol);
  auto F = [&](std::complex<double> z) { return resolvent_second_sheet(cm, z, tol); };
  const double h = 1e-4 * p.gamma;
  auto dF = [&](std::complex<double> z) { return (F(z + h) - F(z - h)) / (2.0 * h); };

  std::complex<double> z = p.z0;
  if (refine) {
    std::complex<double> fz = F(z);
    for (int it = 0; it < 60; ++it) {
      const std::complex<double> step = fz / dF(z);
      double lambda = 1.0;
      bool moved = false;
      for (int k = 0; k < 30; ++k, lambda *= 0.5) {
        const std::complex<double> cand = z - lambda * step;
        if (!(cand.imag() < 0.0)) continue;
        const std::complex<double> fc = F(cand);
        if (std::abs(fc) < std::abs(fz)) {
          z = cand;
          fz = fc;
          moved = true;
          break;
        }
      }
      ++p.newton_steps;
      if (!moved || std::abs(lambda * step) <= 1e-13 * cm.omega_sub) {
        p.converged = std::abs(fz) <= 1e-9 * p.gamma || std::abs(lambda * step) <= 1e-13 * cm.omega_sub;
        break;
      }
    }
    if (p.converged) p.refined = z;
  }
  p.residue_derivative = dF(p.refined ? *p.refined : p.z0);
  return p;
}

double weight_density(const ContinuumModel& cm, double alpha, double quad_tol) {
  return cm.g_sq_at(alpha) / std::norm(resolvent_boundary(cm, alpha, quad_tol));
}

double weight_normalization(const ContinuumModel& cm, double quad_tol) {
  cm.check_decaying();
  quad::check_tolerance(quad_tol);
  const double tol = inner_tol(quad_tol);
  auto f = [&](double a) { return weight_density(cm, a, tol); };
  const auto br = peak_breaks(cm);
  return quad::integrate(quad::RealFn(f), cm.omega_min, cm.omega_max, quad_tol, br).value;
}

ContinuumPropagator::ContinuumPropagator(const ContinuumModel& cm, double t_max, double quad_tol,
                                         std::size_t max_nodes)
    : t_max_(t_max) {
  cm.check_decaying();
  quad::check_tolerance(quad_tol);
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ModelError("t_max must be finite and >= 0");
  const double band = cm.omega_max - cm.omega_min;
  double h = std::min(band / 256.0, width(cm) / 16.0);
  if (t_max > 0.0) h = std::min(h, 0.5 / t_max);
  const double panels_d = std::ceil(band / h);
  const std::size_t per = quad::gauss_legendre_10().nodes.size();
  if (!(panels_d * static_cast<double>(per) <= static_cast<double>(max_nodes))) {
    std::ostringstream os;
    os << "phase resolution for t_max = " << t_max << " needs " << panels_d * per
       << " nodes, above the limit of " << max_nodes;
    throw QuadratureError(os.str());
  }
  const auto panels = static_cast<std::size_t>(panels_d);
  panel_ = band / static_cast<double>(panels);
  auto rule = quad::composite_rule(cm.omega_min, cm.omega_max, panels);
  alpha_ = std::move(rule.nodes);
  weight_.resize(alpha_.size());
  const double tol = inner_tol(quad_tol);
  parallel_for(alpha_.size(), [&](std::size_t i) {
    weight_[i] = rule.weights[i] * weight_density(cm, alpha_[i], tol);
  });
  norm_ = simd::pairwise_sum(weight_.data(), weight_.size());
  std::vector<double> moment(alpha_.size());
  for (std::size_t i = 0; i < alpha_.size(); ++i) moment[i] = weight_[i] * alpha_[i];
  mean_ = simd::pairwise_sum(moment.data(), moment.size()) / norm_;
  centered_.resize(alpha_.size());
  normalized_.resize(alpha_.size());
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    centered_[i] = alpha_[i] - mean_;
    normalized_[i] = weight_[i] / norm_;
  }
}

void ContinuumPropagator::check_time(double t) const {
  if (!(std::fabs(t) <= t_max_ * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "t = " << t << " exceeds the phase-resolved range t_max = " << t_max_
       << "; rebuild the propagator with a larger t_max";
    throw QuadratureError(os.str());
  }
}

std::complex<double> ContinuumPropagator::amplitude(double t) const {
  check_time(t);
  const double* w[1] = {weight_.data()};
  std::complex<double> out;
  simd::kernels().phase_sums(t, alpha_.data(), alpha_.size(), w, 1, &out);
  return out;
}

double ContinuumPropagator::decay_defect(double t) const {
  check_time(t);
  const std::size_t n = alpha_.size();
  std::vector<double> d(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = centered_[i] * t;
    const double h = std::sin(0.5 * th);
    d[i] = 2.0 * normalized_[i] * h * h;
    s[i] = normalized_[i] * std::sin(th);
  }
  const double D = simd::pairwise_sum(d.data(), n);
  const double S = simd::pairwise_sum(s.data(), n);
  return 2.0 * D - D * D - S * S;
}

std::complex<double> survival_amplitude_continuum(const ContinuumModel& cm, double t,
                                                  double quad_tol) {
  if (!(t >= 0.0)) throw ModelError("time must be non-negative");
  return ContinuumPropagator(cm, t, quad_tol).amplitude(t);
}

namespace {

std::vector<double> log_times(double lo, double hi, std::size_t n) {
  std::vector<double> t(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  t.front() = lo;
  t.back() = hi;
  return t;
}

PowerFit loglog(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> x(n), l(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0)) throw FitError("power-law fit needs positive values");
    x[i] = std::log(t[i]);
    l[i] = std::log(y[i]);
  }
  const double xm = simd::pairwise_sum(x.data(), n) / static_cast<double>(n);
  const double lm = simd::pairwise_sum(l.data(), n) / static_cast<double>(n);
  double sxx = 0.0, sxl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxl += (x[i] - xm) * (l[i] - lm);
  }
  PowerFit f;
  f.exponent = sxl / sxx;
  const double c = lm - f.exponent * xm;
  f.prefactor = std::exp(c);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = l[i] - (c + f.exponent * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / static_cast<double>(n));
  f.points = n;
  return f;
}

}  // namespace

PowerFit zeno_fit(const ContinuumPropagator& prop, double t_lo, double t_hi, std::size_t samples) {
  if (!(t_lo > 0.0 && t_hi > t_lo) || samples < 3) throw FitError("bad Zeno fit window");
  const auto t = log_times(t_lo, t_hi, samples);
  std::vector<double> y(samples);
  for (std::size_t i = 0; i < samples; ++i) y[i] = prop.decay_defect(t[i]);
  return loglog(t, y);
}

KhalfinFit khalfin_tail(const ContinuumModel& cm, double t_lo, double t_hi, double quad_tol,
                        std::size_t samples) {
  cm.check_decaying();
  if (!(cm.omega_min > 0.0)) throw ModelError("power-law tail needs omega_min > 0");
  if (!(t_lo >= 10.0 / cm.omega_max && t_hi > t_lo && t_hi <= 1.0 / cm.omega_min) || samples < 3) {
    std::ostringstream os;
    os << "fit window [" << t_lo << ", " << t_hi << "] outside the tail range ["
       << 10.0 / cm.omega_max << ", " << 1.0 / cm.omega_min << "]";
    throw ModelError(os.str());
  }
  const ContinuumPropagator prop(cm, t_hi, quad_tol);
  const auto t = log_times(t_lo, t_hi, samples);
  std::vector<double> y(samples);
  for (std::size_t i = 0; i < samples; ++i) y[i] = prop.survival_probability(t[i]);
  KhalfinFit k;
  k.fit = loglog(t, y);
  k.lambda = std::pow(std::pow(cm.omega_max, 4) - std::pow(cm.omega_min, 4), 0.25);
  return k;
}

std::complex<double> khalfin_low_frequency_amplitude(const UllersmaDensity& u, double omega_min,
                                                     double omega_max, double omega_sub,
                                                     double t) {
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  auto prim = [&](double x) { return (x * x - 2.0 * i * x - 2.0) * std::exp(-i * x); };
  const double r = u.c1 / u.c2;
  const double k = r * r / ((omega_min - omega_sub) * (omega_min - omega_sub));
  return k * i / (t * t * t) * (prim(omega_max * t) - prim(omega_min * t));
}

double asymptotic_occupation(const ContinuumModel& cm, bool weak_coupling, double quad_tol) {
  cm.check();
  if (weak_coupling) return thermal_occupancy(cm.beta, cm.omega_sub);
  cm.check_decaying();
  quad::check_tolerance(quad_tol);
  const double tol = inner_tol(quad_tol);
  auto f = [&](double a) {
    const double rho = weight_density(cm, a, tol);
    return rho == 0.0 ? 0.0 : rho * thermal_occupancy(cm.beta, a);
  };
  const auto br = peak_breaks(cm);
  return quad::integrate(quad::RealFn(f), cm.omega_min, cm.omega_max, quad_tol, br).value;
}

ContinuumValidity validate_continuum(const ContinuumModel& cm, double quad_tol, double delta) {
  cm.check();
  quad::check_tolerance(quad_tol);
  if (!(delta >= 0.0)) throw ModelError("delta must be non-negative");
  ContinuumValidity v;
  v.delta = delta;
  v.left_bound = cm.omega_sub - cm.omega_min + delta;
  v.right_bound = cm.omega_max + delta - cm.omega_sub;
  const double inf = std::numeric_limits<double>::infinity();
  std::ostringstream note;

  auto attempt = [&](auto integrand, bool edge_nonzero, double& sum, bool& divergent,
                     const char* which) {
    if (edge_nonzero) {
      sum = inf;
      divergent = true;
      note << which << " integral has a logarithmic divergence (g^2 nonzero at the cutoff); ";
      return;
    }
    try {
      const auto r = quad::integrate(quad::RealFn(integrand), cm.omega_min, cm.omega_max, quad_tol);
      sum = r.value;
      if (!std::isfinite(sum) || sum > 1e300) throw QuadratureError("non-finite");
    } catch (const QuadratureError&) {
      sum = inf;
      divergent = true;
      note << which << " integral diverges; ";
    }
  };

  attempt([&](double w) { return cm.g_sq_at(w) / (w - cm.omega_min + delta); },
          delta == 0.0 && cm.g_sq_at(cm.omega_min) > 0.0, v.left_sum, v.left_divergent, "left");
  if (std::isinf(cm.omega_max)) {
    v.right_sum = 0.0;
    v.right_bound = inf;
  } else {
    attempt([&](double w) { return cm.g_sq_at(w) / (cm.omega_max + delta - w); },
            delta == 0.0 && cm.g_sq_at(cm.omega_max) > 0.0, v.right_sum, v.right_divergent,
            "right");
  }
  v.passes[0] = !v.left_divergent && v.left_sum < v.left_bound;
  v.passes[1] = !v.right_divergent && v.right_sum < v.right_bound;
  if (!v.passes[0] || !v.passes[1]) note << "the dissipation conditions are not satisfied";
  v.note = note.str();
  return v;
}

}  // namespace qbm
