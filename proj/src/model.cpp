#include "qbm/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "qbm/error.hpp"

namespace qbm {

namespace {

std::string fmt_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_spectrum(double omega_sub, std::span<const double> freqs,
                    std::span<const double> couplings) {
  if (!(omega_sub > 0.0) || !std::isfinite(omega_sub))
    throw ModelError("omega_sub must be a positive finite frequency, got " + fmt_real(omega_sub));
  if (freqs.empty()) throw ModelError("bath must contain at least one oscillator (N >= 1)");
  if (freqs.size() != couplings.size())
    throw ModelError("bath frequencies and couplings differ in length");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!(freqs[i] > 0.0) || !std::isfinite(freqs[i]))
      throw ModelError("bath frequency omega_" + std::to_string(i + 1) +
                       " must be positive and finite, got " + fmt_real(freqs[i]));
    if (i > 0 && !(freqs[i] > freqs[i - 1]))
      throw ModelError("bath frequencies must be strictly increasing: omega_" +
                       std::to_string(i + 1) + " = " + fmt_real(freqs[i]) + " <= omega_" +
                       std::to_string(i) + " = " + fmt_real(freqs[i - 1]));
    if (couplings[i] == 0.0 || !std::isfinite(couplings[i]))
      throw ModelError("coupling g_" + std::to_string(i + 1) +
                       " must be nonzero and finite: the normal-mode expansion is valid "
                       "only if every bath oscillator is coupled");
  }
}

}  // namespace

std::string to_string(BandConvention c) {
  return c == BandConvention::prose ? "prose" : "formula";
}

BandConvention parse_band_convention(const std::string& s) {
  if (s == "prose") return BandConvention::prose;
  if (s == "formula") return BandConvention::formula;
  throw ModelError("unknown band-width convention '" + s + "' (expected prose or formula)");
}

SpectralModel::SpectralModel(double omega_sub, std::vector<double> bath_freqs,
                             std::vector<double> couplings, ThermalParams thermal,
                             std::optional<EquidistantLorentzian> provenance)
    : omega_sub_(omega_sub),
      thermal_(thermal),
      freqs_(std::move(bath_freqs)),
      couplings_(std::move(couplings)),
      provenance_(std::move(provenance)) {
  check_spectrum(omega_sub_, freqs_, couplings_);
  if (!(thermal_.beta > 0.0))
    throw ModelError("beta must be positive, got " + fmt_real(thermal_.beta));
  if (!(thermal_.kappa >= 0.0) || !std::isfinite(thermal_.kappa))
    throw ModelError("kappa must be a nonnegative mean occupancy, got " + fmt_real(thermal_.kappa));
  if (!(thermal_.mass > 0.0) || !std::isfinite(thermal_.mass))
    throw ModelError("mass must be positive, got " + fmt_real(thermal_.mass));
  couplings_sq_.resize(couplings_.size());
  std::transform(couplings_.begin(), couplings_.end(), couplings_sq_.begin(),
                 [](double g) { return g * g; });
}

SpectralModel SpectralModel::with_thermal(ThermalParams thermal) const {
  return SpectralModel(omega_sub_, freqs_, couplings_, thermal, provenance_);
}

double band_spacing(std::size_t n_osc, double band_width, BandConvention convention) {
  if (!(band_width > 0.0)) throw ModelError("band width must be positive");
  const std::size_t divisor = convention == BandConvention::prose ? n_osc - 2 : n_osc - 1;
  if (n_osc < 3 || divisor == 0)
    throw ModelError("band width convention needs at least 3 bath oscillators");
  return band_width / static_cast<double>(divisor);
}

std::vector<double> equidistant_frequencies(double omega_sub, std::size_t n_osc,
                                            double spacing) {
  if (n_osc % 2 == 0)
    throw ModelError("equidistant bath needs an odd number of oscillators, got " +
                     std::to_string(n_osc));
  if (!(spacing > 0.0)) throw ModelError("bath spacing must be positive");
  const long long center = static_cast<long long>((n_osc + 1) / 2);
  std::vector<double> w(n_osc);
  for (std::size_t i = 0; i < n_osc; ++i) {
    const long long offset = static_cast<long long>(i + 1) - center;
    w[i] = omega_sub + spacing * static_cast<double>(offset);
  }
  if (!(w.front() > 0.0))
    throw ModelError("lowest bath frequency omega_1 = " + fmt_real(w.front()) +
                     " is not positive");
  return w;
}

std::vector<double> build_equidistant_bath(double omega_sub, std::size_t n_osc,
                                           double band_width, BandConvention convention) {
  if (n_osc % 2 == 0)
    throw ModelError("equidistant bath needs an odd number of oscillators, got " +
                     std::to_string(n_osc));
  return equidistant_frequencies(omega_sub, n_osc, band_spacing(n_osc, band_width, convention));
}

std::vector<double> lorentzian_coupling(std::span<const double> bath_freqs, double omega_sub,
                                        double d_amp, double a_width) {
  if (!(a_width > 0.0)) throw ModelError("Lorentzian width a must be positive");
  const double a2 = a_width * a_width;
  std::vector<double> g(bath_freqs.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = bath_freqs[i] - omega_sub;
    g[i] = d_amp * a2 / (a2 + x * x);
  }
  return g;
}

double thermal_occupancy(double beta, double omega) {
  if (!(beta > 0.0) || !(omega > 0.0))
    throw ModelError("thermal occupancy needs beta > 0 and omega > 0");
  if (std::isinf(beta)) return 0.0;
  const double v = 1.0 / std::expm1(beta * omega);
  if (!std::isfinite(v))
    throw RangeError("thermal occupancy out of range for beta*omega = " +
                     fmt_real(beta * omega));
  return v;
}

std::vector<double> thermal_occupancies(double beta, std::span<const double> omegas) {
  std::vector<double> n(omegas.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = thermal_occupancy(beta, omegas[i]);
  return n;
}

InitialState InitialState::thermal(const SpectralModel& model) {
  return {model.kappa(), thermal_occupancies(model.beta(), model.bath_freqs())};
}

ValidityReport validate_dissipation(const SpectralModel& model, double delta) {
  if (!(delta > 0.0)) throw ModelError("validity offset delta must be positive");
  const auto w = model.bath_freqs();
  const auto g2 = model.couplings_sq();
  const double w1 = w.front(), wn = w.back();
  ValidityReport r;
  r.delta = delta;
  for (std::size_t i = 0; i < w.size(); ++i) {
    r.left_sum += g2[i] / (w[i] - w1 + delta);
    r.right_sum += g2[i] / (wn + delta - w[i]);
  }
  r.left_bound = model.omega_sub() - w1 + delta;
  r.right_bound = wn + delta - model.omega_sub();
  r.passes = {r.left_sum < r.left_bound, r.right_sum < r.right_bound};
  if (const auto& p = model.provenance())
    r.d_bound_ratio = p->d_amp / (std::sqrt(2.0) * p->spacing);
  return r;
}

SpectralModel build_paper_model(const PaperBathParams& p) {
  if (p.n_total < 4) throw ModelError("equidistant bath needs N + 1 >= 4");
  EquidistantLorentzian prov;
  prov.n_osc = p.n_total - 1;
  prov.band_width = p.band_width;
  prov.convention = p.convention;
  prov.spacing = band_spacing(prov.n_osc, p.band_width, p.convention);
  prov.d_amp = p.d_over_a * prov.spacing;
  prov.a_width = prov.spacing * static_cast<double>(prov.n_osc - 2) / 2.0;
  auto w = equidistant_frequencies(p.omega_sub, prov.n_osc, prov.spacing);
  auto g = lorentzian_coupling(w, p.omega_sub, prov.d_amp, prov.a_width);
  return SpectralModel(p.omega_sub, std::move(w), std::move(g), p.thermal, prov);
}

// ---------------------------------------------------------------------------
// text format

double parse_real(const std::string& text, const std::string& source, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw ParseError(source, line, "expected a decimal number, got '" + t + "'");
  return v;
}

const KeyValueFile::Entry* KeyValueFile::find(const std::string& key) const {
  const Entry* hit = nullptr;
  for (const auto& e : entries)
    if (e.key == key) hit = &e;
  return hit;
}

KeyValueFile parse_key_value(std::istream& in, const std::string& source) {
  KeyValueFile f;
  f.source = source;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[bath]")
        throw ParseError(source, lineno, "unknown section '" + line + "'");
      if (f.has_bath_section) throw ParseError(source, lineno, "duplicate [bath] section");
      f.has_bath_section = true;
      continue;
    }
    if (f.has_bath_section) {
      std::istringstream ss(line);
      std::string a, b, extra;
      ss >> a >> b;
      if (b.empty() || (ss >> extra))
        throw ParseError(source, lineno, "bath line must hold exactly 'omega g'");
      f.bath.push_back({parse_real(a, source, lineno), parse_real(b, source, lineno), lineno});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source, lineno, "expected 'key = value'");
    KeyValueFile::Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (e.key.empty()) throw ParseError(source, lineno, "missing key before '='");
    if (e.value.size() >= 2 && e.value.front() == '"' && e.value.back() == '"')
      e.value = e.value.substr(1, e.value.size() - 2);
    f.entries.push_back(std::move(e));
  }
  return f;
}

SpectralModel parse_model(std::istream& in, const std::string& source) {
  const KeyValueFile f = parse_key_value(in, source);
  double omega_sub = 1.0;
  ThermalParams th;
  for (const auto& e : f.entries) {
    const double v = (e.key == "beta" && e.value == "inf")
                         ? std::numeric_limits<double>::infinity()
                         : parse_real(e.value, source, e.line);
    if (e.key == "omega_sub") omega_sub = v;
    else if (e.key == "beta") th.beta = v;
    else if (e.key == "kappa") th.kappa = v;
    else if (e.key == "mass") th.mass = v;
    else throw ParseError(source, e.line, "unknown key '" + e.key + "'");
  }
  if (!f.has_bath_section || f.bath.empty())
    throw ParseError(source, 0, "missing [bath] section with at least one 'omega g' line");
  std::vector<double> w, g;
  for (std::size_t i = 0; i < f.bath.size(); ++i) {
    const auto& b = f.bath[i];
    if (i > 0 && !(b.omega > f.bath[i - 1].omega))
      throw ParseError(source, b.line,
                       "bath frequencies must be strictly increasing (monotonicity violated)");
    if (b.g == 0.0)
      throw ParseError(source, b.line,
                       "zero coupling: the normal-mode expansion is valid only if every "
                       "coupling is nonzero");
    w.push_back(b.omega);
    g.push_back(b.g);
  }
  try {
    return SpectralModel(omega_sub, std::move(w), std::move(g), th);
  } catch (const ModelError& e) {
    throw ParseError(source, 0, e.what());
  }
}

SpectralModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse_model(in, path);
}

void save_model(const SpectralModel& model, std::ostream& out) {
  out << "omega_sub = " << fmt_real(model.omega_sub()) << '\n'
      << "beta = " << fmt_real(model.beta()) << '\n'
      << "kappa = " << fmt_real(model.kappa()) << '\n'
      << "mass = " << fmt_real(model.mass()) << '\n'
      << "[bath]\n";
  const auto w = model.bath_freqs();
  const auto g = model.couplings();
  for (std::size_t i = 0; i < w.size(); ++i)
    out << fmt_real(w[i]) << ' ' << fmt_real(g[i]) << '\n';
}

}  // namespace qbm
