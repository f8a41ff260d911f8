#pragma once

// Discrete oscillator-bath models in the rotating-wave coupling form.
// Units: hbar = k_B = 1; the subsystem frequency sets the scale.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qbm {

/// How the fixed band width is turned into the spacing A of an equidistant
/// bath. `prose`: omega_N - omega_1 = A (N - 2). `formula`: the span implied
/// by omega_n = Omega + A (n - (N+1)/2), i.e. A (N - 1).
enum class BandConvention { prose, formula };

std::string to_string(BandConvention c);
BandConvention parse_band_convention(const std::string& s);

struct ThermalParams {
  double beta = 1.0;   // may be +infinity (zero temperature)
  double kappa = 1.0;  // initial mean quanta of the subsystem
  double mass = 1.0;
};

/// Parameters of the equidistant bath with Lorentzian couplings, kept with a
/// model built from them so reports can quote D / (sqrt(2) A).
struct EquidistantLorentzian {
  std::size_t n_osc = 0;
  double band_width = 0.0;
  BandConvention convention = BandConvention::prose;
  double spacing = 0.0;  // A
  double d_amp = 0.0;    // D
  double a_width = 0.0;  // a
};

/// Subsystem frequency, thermal data and the bath spectrum (omega_n, g_n).
/// Immutable; the constructor enforces N >= 1, strictly increasing positive
/// frequencies and nonzero couplings.
class SpectralModel {
 public:
  SpectralModel(double omega_sub, std::vector<double> bath_freqs,
                std::vector<double> couplings, ThermalParams thermal = {},
                std::optional<EquidistantLorentzian> provenance = std::nullopt);

  double omega_sub() const noexcept { return omega_sub_; }
  double beta() const noexcept { return thermal_.beta; }
  double kappa() const noexcept { return thermal_.kappa; }
  double mass() const noexcept { return thermal_.mass; }
  const ThermalParams& thermal() const noexcept { return thermal_; }

  std::size_t size() const noexcept { return freqs_.size(); }
  std::span<const double> bath_freqs() const noexcept { return freqs_; }
  std::span<const double> couplings() const noexcept { return couplings_; }
  std::span<const double> couplings_sq() const noexcept { return couplings_sq_; }

  const std::optional<EquidistantLorentzian>& provenance() const noexcept {
    return provenance_;
  }

  /// Same spectrum, different thermal data.
  SpectralModel with_thermal(ThermalParams thermal) const;

 private:
  double omega_sub_;
  ThermalParams thermal_;
  std::vector<double> freqs_;
  std::vector<double> couplings_;
  std::vector<double> couplings_sq_;
  std::optional<EquidistantLorentzian> provenance_;
};

/// Spacing A for a band of the given width under a convention.
double band_spacing(std::size_t n_osc, double band_width, BandConvention convention);

/// omega_n = Omega + A (n - (N+1)/2), n = 1..N. N must be odd and omega_1 > 0.
std::vector<double> equidistant_frequencies(double omega_sub, std::size_t n_osc,
                                            double spacing);

std::vector<double> build_equidistant_bath(double omega_sub, std::size_t n_osc,
                                           double band_width, BandConvention convention);

/// g_n = D a^2 / (a^2 + (omega_n - Omega)^2)
std::vector<double> lorentzian_coupling(std::span<const double> bath_freqs,
                                        double omega_sub, double d_amp, double a_width);

/// Bose-Einstein occupancy 1 / (exp(beta omega) - 1). Zero for beta = inf.
/// Throws RangeError when the value is not representable.
double thermal_occupancy(double beta, double omega);

std::vector<double> thermal_occupancies(double beta, std::span<const double> omegas);

/// Factorized initial state: subsystem quanta plus thermal bath occupancies.
struct InitialState {
  double kappa = 0.0;
  std::vector<double> bath_occupancies;

  static InitialState thermal(const SpectralModel& model);
};

/// The two positivity conditions for a finite bath, evaluated with a
/// regularising offset delta:
///   sum g_n^2 / (omega_n - omega_1 + delta) < Omega - omega_1 + delta
///   sum g_n^2 / (omega_N + delta - omega_n) < omega_N + delta - Omega
struct ValidityReport {
  double delta = 0.0;
  double left_sum = 0.0, right_sum = 0.0;
  double left_bound = 0.0, right_bound = 0.0;
  std::optional<double> d_bound_ratio;  // D / (sqrt(2) A), equidistant models only
  std::array<bool, 2> passes{false, false};

  bool all_pass() const noexcept { return passes[0] && passes[1]; }
};

ValidityReport validate_dissipation(const SpectralModel& model, double delta);

/// Settings of the equidistant Lorentzian family. `n_total` counts the
/// subsystem too (N + 1), as tabulated in recurrence studies.
struct PaperBathParams {
  std::size_t n_total = 32;
  double omega_sub = 1.0;
  double band_width = 0.018;
  BandConvention convention = BandConvention::prose;
  double d_over_a = 1.0;  // D = d_over_a * A
  ThermalParams thermal{};
};

/// Omega = beta = kappa = 1, band width 0.018, D = A, a = A (N - 2) / 2.
SpectralModel build_paper_model(const PaperBathParams& p);

/// Plain-text model format:
///   # comment
///   omega_sub = 1.0
///   beta = 1          (also: kappa, mass)
///   [bath]
///   omega  g          (one pair per line)
SpectralModel load_model(const std::string& path);
SpectralModel parse_model(std::istream& in, const std::string& source = "<input>");
void save_model(const SpectralModel& model, std::ostream& out);

/// Generic `key = value` file with an optional `[bath]` section; shared by
/// the model loader and the CLI config reader.
struct KeyValueFile {
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };
  struct BathLine {
    double omega = 0.0;
    double g = 0.0;
    std::size_t line = 0;
  };
  std::vector<Entry> entries;
  std::vector<BathLine> bath;
  bool has_bath_section = false;
  std::string source;

  const Entry* find(const std::string& key) const;
};

KeyValueFile parse_key_value(std::istream& in, const std::string& source);

/// Strict decimal parse (optional exponent); throws ParseError.
double parse_real(const std::string& text, const std::string& source, std::size_t line);

}  // namespace qbm
