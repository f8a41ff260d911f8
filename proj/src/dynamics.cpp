#include "qbm/dynamics.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/simd/kernels.hpp"

namespace qbm {

void TimeGrid::validate() const {
  if (!std::isfinite(t0)) throw ModelError("time grid origin must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ModelError("time step must be positive");
  if (count < 1) throw ModelError("time grid needs at least one sample");
  if (!std::isfinite(end())) throw ModelError("time grid end is not finite");
}

TimeGrid TimeGrid::span(double t0, double t1, std::size_t count) {
  if (count < 1) throw ModelError("time grid needs at least one sample");
  TimeGrid g;
  g.t0 = t0;
  g.count = count;
  if (count == 1) {
    g.dt = 1.0;
  } else {
    if (!(t1 > t0)) throw ModelError("time grid end must exceed its start");
    g.dt = (t1 - t0) / static_cast<double>(count - 1);
  }
  g.validate();
  return g;
}

bool TimeSeries::has_column(std::string_view name) const {
  for (const auto& n : names)
    if (n == name) return true;
  return false;
}

const std::vector<double>& TimeSeries::column(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw std::out_of_range("no column named '" + std::string(name) + "'");
}

std::vector<double> TimeSeries::times() const {
  std::vector<double> t(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) t[i] = grid.at(i);
  return t;
}

namespace {

void check_bath_index(const NormalModes& modes, std::size_t n) {
  if (n == 0 || n > modes.model().size())
    throw std::out_of_range("bath index " + std::to_string(n) + " outside 1.." +
                            std::to_string(modes.model().size()));
}

// c_nu = |Phi_nu|^2 exp(-i alpha_nu t), split into real and imaginary parts.
struct Frame {
  std::vector<double> re, im;

  Frame(const NormalModes& modes, double t) : re(modes.size()), im(modes.size()) {
    const auto alpha = modes.alphas();
    const auto w = modes.weights();
    simd::kernels().phasors(t, alpha.data(), alpha.size(), re.data(), im.data());
    for (std::size_t nu = 0; nu < re.size(); ++nu) {
      re[nu] *= w[nu];
      im[nu] *= w[nu];
    }
  }
};

// out[nu] = omega_i - alpha_nu; with these as poles and x = 0 the Cauchy
// kernel yields sum c_nu / (alpha_nu - omega_i) from accurate differences.
void negated_offsets(const NormalModes& modes, std::size_t i, std::vector<double>& out) {
  out.resize(modes.size());
  modes.pole_offsets(i, out.data());
  for (double& v : out) v = -v;
}

// sum_nu c_nu / (alpha_nu - omega_i), i 0-based
std::complex<double> resolvent_sum(const NormalModes& modes, const double* cre,
                                   const double* cim, std::size_t i, std::vector<double>& buf) {
  negated_offsets(modes, i, buf);
  return simd::kernels().cauchy_sum(0.0, buf.data(), cre, cim, buf.size());
}

double omega_n_prob(const NormalModes& modes, const Frame& f, std::size_t n,
                    std::vector<double>& buf) {
  const double g = modes.model().couplings()[n - 1];
  return std::norm(g * resolvent_sum(modes, f.re.data(), f.im.data(), n - 1, buf));
}

// c_nu / (alpha_nu - omega_n)
void divide_by_offsets(const NormalModes& modes, const Frame& f, std::size_t n,
                       std::vector<double>& cre, std::vector<double>& cim) {
  const std::size_t count = modes.size();
  cre.resize(count);
  cim.resize(count);
  modes.pole_offsets(n - 1, cre.data());
  for (std::size_t nu = 0; nu < count; ++nu) {
    const double inv = 1.0 / cre[nu];
    cre[nu] = f.re[nu] * inv;
    cim[nu] = f.im[nu] * inv;
  }
}

// P_nm for all m given the frame; also returns P_{n Omega} via `to_omega`.
void bath_row(const NormalModes& modes, const Frame& f, std::size_t n, double* out,
              double* to_omega) {
  const auto g = modes.model().couplings();
  const std::size_t count = modes.size();
  std::vector<double> cre, cim, buf;
  divide_by_offsets(modes, f, n, cre, cim);
  const double gn = g[n - 1];
  for (std::size_t m = 0; m < g.size(); ++m)
    out[m] = std::norm(gn * g[m] * resolvent_sum(modes, cre.data(), cim.data(), m, buf));
  if (to_omega) {
    const double re = simd::pairwise_sum(cre.data(), count);
    const double im = simd::pairwise_sum(cim.data(), count);
    *to_omega = gn * gn * (re * re + im * im);
  }
}

double occupation_from(const NormalModes& modes, const InitialState& init, const Frame& f) {
  const std::size_t n = modes.model().size();
  const double re = simd::pairwise_sum(f.re.data(), f.re.size());
  const double im = simd::pairwise_sum(f.im.data(), f.im.size());
  const double surv = re * re + im * im;
  double acc = init.kappa * surv;
  std::vector<double> buf;
  for (std::size_t k = 1; k <= n; ++k) {
    const double nbar = init.bath_occupancies[k - 1];
    if (nbar != 0.0) acc += omega_n_prob(modes, f, k, buf) * nbar;
  }
  return acc;
}

void check_init(const NormalModes& modes, const InitialState& init) {
  if (init.bath_occupancies.size() != modes.model().size())
    throw ModelError("initial state has " + std::to_string(init.bath_occupancies.size()) +
                     " bath occupancies for a bath of " + std::to_string(modes.model().size()));
}

}  // namespace

std::complex<double> survival_amplitude(const NormalModes& modes, double t) {
  const auto alpha = modes.alphas();
  const double* w[1] = {modes.weights().data()};
  std::complex<double> out;
  simd::kernels().phase_sums(t, alpha.data(), alpha.size(), w, 1, &out);
  return out;
}

double p_omega_omega(const NormalModes& modes, double t) {
  return std::norm(survival_amplitude(modes, t));
}

double p_omega_n(const NormalModes& modes, std::size_t n, double t) {
  check_bath_index(modes, n);
  std::vector<double> buf;
  return omega_n_prob(modes, Frame(modes, t), n, buf);
}

double p_nm(const NormalModes& modes, std::size_t n, std::size_t m, double t) {
  check_bath_index(modes, n);
  check_bath_index(modes, m);
  const Frame f(modes, t);
  const auto g = modes.model().couplings();
  std::vector<double> cre, cim, buf;
  divide_by_offsets(modes, f, n, cre, cim);
  return std::norm(g[n - 1] * g[m - 1] * resolvent_sum(modes, cre.data(), cim.data(), m - 1, buf));
}

std::vector<double> subsystem_bath_probabilities(const NormalModes& modes, double t) {
  const Frame f(modes, t);
  std::vector<double> out(modes.model().size());
  std::vector<double> buf;
  for (std::size_t n = 1; n <= out.size(); ++n) out[n - 1] = omega_n_prob(modes, f, n, buf);
  return out;
}

std::vector<double> bath_row_probabilities(const NormalModes& modes, std::size_t n, double t) {
  check_bath_index(modes, n);
  const Frame f(modes, t);
  std::vector<double> out(modes.model().size());
  bath_row(modes, f, n, out.data(), nullptr);
  return out;
}

double mean_subsystem_occupation(const NormalModes& modes, const InitialState& init, double t) {
  check_init(modes, init);
  return occupation_from(modes, init, Frame(modes, t));
}

double mean_bath_occupation(const NormalModes& modes, const InitialState& init, std::size_t n,
                            double t) {
  check_bath_index(modes, n);
  check_init(modes, init);
  const Frame f(modes, t);
  std::vector<double> row(modes.model().size());
  double to_omega = 0.0;
  bath_row(modes, f, n, row.data(), &to_omega);
  double acc = init.kappa * to_omega;
  for (std::size_t m = 0; m < row.size(); ++m) acc += row[m] * init.bath_occupancies[m];
  return acc;
}

namespace {

double total_from(const NormalModes& modes, const InitialState& init, const Frame& f) {
  const std::size_t n = modes.model().size();
  double total = occupation_from(modes, init, f);
  std::vector<double> row(n);
  for (std::size_t k = 1; k <= n; ++k) {
    double to_omega = 0.0;
    bath_row(modes, f, k, row.data(), &to_omega);
    double acc = init.kappa * to_omega;
    for (std::size_t m = 0; m < n; ++m) acc += row[m] * init.bath_occupancies[m];
    total += acc;
  }
  return total;
}

}  // namespace

double total_quanta(const NormalModes& modes, const InitialState& init, double t) {
  check_init(modes, init);
  return total_from(modes, init, Frame(modes, t));
}

PhasePoint mean_phase_point(const NormalModes& modes, PhasePoint initial, double t) {
  const auto s = survival_amplitude(modes, t);
  const double a = s.real(), b = -s.imag();
  return {a * initial.x + b * initial.p, -b * initial.x + a * initial.p};
}

double mean_position(const NormalModes& modes, double x0, double p0, double t) {
  return mean_phase_point(modes, {x0, p0}, t).x;
}

double mean_momentum_tilde(const NormalModes& modes, double x0, double p0, double t) {
  return mean_phase_point(modes, {x0, p0}, t).p;
}

std::vector<double> long_time_transfer(const NormalModes& modes) {
  const auto wt = modes.weights();
  const auto g2 = modes.model().couplings_sq();
  std::vector<double> w2(modes.size()), buf;
  for (std::size_t nu = 0; nu < w2.size(); ++nu) w2[nu] = wt[nu] * wt[nu];
  std::vector<double> out(g2.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    negated_offsets(modes, n, buf);
    out[n] = g2[n] * simd::kernels().secular_sums(0.0, buf.data(), w2.data(), buf.size()).second;
  }
  return out;
}

namespace {

enum class Obs { n_omega, p_surv, x_mean, p_tilde, n_total, n_bath, p_omega_n };

struct ParsedObs {
  Obs kind;
  std::size_t index = 0;
};

ParsedObs parse_observable(const NormalModes& modes, const std::string& name) {
  if (name == "N_omega") return {Obs::n_omega};
  if (name == "P_surv") return {Obs::p_surv};
  if (name == "X_mean") return {Obs::x_mean};
  if (name == "P_tilde_mean") return {Obs::p_tilde};
  if (name == "N_total") return {Obs::n_total};
  auto indexed = [&](std::string_view prefix, Obs kind) -> std::optional<ParsedObs> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const char* first = name.data() + prefix.size();
    const char* last = name.data() + name.size();
    std::size_t idx = 0;
    const auto res = std::from_chars(first, last, idx);
    if (res.ec != std::errc() || res.ptr != last || first == last)
      throw ModelError("bad index in observable '" + name + "'");
    if (idx == 0 || idx > modes.model().size())
      throw ModelError("observable '" + name + "' refers to a bath oscillator outside 1.." +
                       std::to_string(modes.model().size()));
    return ParsedObs{kind, idx};
  };
  if (auto p = indexed("N_bath:", Obs::n_bath)) return *p;
  if (auto p = indexed("P_omega_n:", Obs::p_omega_n)) return *p;
  throw ModelError("unknown observable '" + name +
                   "' (expected N_omega, P_surv, X_mean, P_tilde_mean, N_total, N_bath:<n>, "
                   "P_omega_n:<n>)");
}

}  // namespace

void validate_observables(const NormalModes& modes, std::span<const std::string> names) {
  for (const auto& n : names) parse_observable(modes, n);
}

TimeSeries evolve_series(const NormalModes& modes, const InitialState& init,
                         const TimeGrid& grid, const EvolveRequest& request) {
  grid.validate();
  check_init(modes, init);
  std::vector<ParsedObs> obs;
  obs.reserve(request.observables.size());
  for (const auto& n : request.observables) obs.push_back(parse_observable(modes, n));

  TimeSeries ts;
  ts.grid = grid;
  ts.names = request.observables;
  ts.columns.assign(obs.size(), std::vector<double>(grid.count));
  ts.valid.assign(grid.count, 1);
  if (obs.empty()) return ts;

  parallel_for(grid.count, [&](std::size_t i) {
    const double t = grid.at(i);
    const Frame f(modes, t);
    std::vector<double> row;
    for (std::size_t k = 0; k < obs.size(); ++k) {
      double v = 0.0;
      switch (obs[k].kind) {
        case Obs::n_omega: v = occupation_from(modes, init, f); break;
        case Obs::p_surv: v = p_omega_omega(modes, t); break;
        case Obs::x_mean: v = mean_phase_point(modes, request.initial, t).x; break;
        case Obs::p_tilde: v = mean_phase_point(modes, request.initial, t).p; break;
        case Obs::n_total: v = total_from(modes, init, f); break;
        case Obs::p_omega_n: v = omega_n_prob(modes, f, obs[k].index, row); break;
        case Obs::n_bath: {
          row.resize(modes.model().size());
          double to_omega = 0.0;
          bath_row(modes, f, obs[k].index, row.data(), &to_omega);
          v = init.kappa * to_omega;
          for (std::size_t m = 0; m < row.size(); ++m) v += row[m] * init.bath_occupancies[m];
          break;
        }
      }
      ts.columns[k][i] = v;
    }
  });
  return ts;
}

}  // namespace qbm
