#include "qbm/eigensolve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/simd/kernels.hpp"

namespace qbm {

NormalModes::NormalModes(SpectralModel model, std::vector<double> alphas,
                         std::vector<double> weights, std::vector<double> residuals,
                         std::vector<std::string> warnings, std::vector<std::size_t> anchors,
                         std::vector<double> offsets)
    : model_(std::move(model)),
      alphas_(std::move(alphas)),
      weights_(std::move(weights)),
      residuals_(std::move(residuals)),
      warnings_(std::move(warnings)),
      anchors_(std::move(anchors)),
      offsets_(std::move(offsets)) {
  if (alphas_.size() != model_.size() + 1 || weights_.size() != alphas_.size())
    throw ModelError("normal modes must hold N + 1 frequencies and weights");
  if (residuals_.empty()) residuals_.assign(alphas_.size(), 0.0);
  if (residuals_.size() != alphas_.size())
    throw ModelError("residual count does not match mode count");
  const auto w = model_.bath_freqs();
  if (anchors_.empty() && offsets_.empty()) {
    for (double a : alphas_) {
      const auto it = std::lower_bound(w.begin(), w.end(), a);
      std::size_t k = it == w.end() ? w.size() - 1 : static_cast<std::size_t>(it - w.begin());
      if (k > 0 && a - w[k - 1] < w[k] - a) --k;
      anchors_.push_back(k);
      offsets_.push_back(a - w[k]);
    }
  }
  if (anchors_.size() != alphas_.size() || offsets_.size() != alphas_.size())
    throw ModelError("anchor count does not match mode count");
  for (std::size_t k : anchors_)
    if (k >= w.size()) throw ModelError("anchor outside the bath");
}

double NormalModes::pole_offset(std::size_t nu, std::size_t i) const {
  const auto w = model_.bath_freqs();
  const std::size_t k = anchors_.at(nu);
  return (w[k] - w[i]) + offsets_[nu];
}

double NormalModes::mode_gap(std::size_t nu) const {
  return pole_offset(nu + 1, anchors_.at(nu)) - offsets_[nu];
}

void NormalModes::pole_offsets(std::size_t i, double* out) const {
  const auto w = model_.bath_freqs();
  const double wi = w[i];
  for (std::size_t nu = 0; nu < alphas_.size(); ++nu)
    out[nu] = (w[anchors_[nu]] - wi) + offsets_[nu];
}

double NormalModes::amplitude(std::size_t nu) const { return std::sqrt(weights_.at(nu)); }

double NormalModes::bath_coefficient(std::size_t nu, std::size_t n) const {
  if (n == 0 || n > model_.size()) throw std::out_of_range("bath index out of range");
  return model_.couplings()[n - 1] * amplitude(nu) / pole_offset(nu, n - 1);
}

double NormalModes::min_pole_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (double o : offsets_) best = std::min(best, std::fabs(o));
  return best;
}

double secular_value(double alpha, const SpectralModel& model) {
  const auto w = model.bath_freqs();
  if (std::binary_search(w.begin(), w.end(), alpha)) {
    std::ostringstream os;
    os << "secular function has a pole at alpha = " << alpha;
    throw SolverError(os.str());
  }
  const auto s = simd::kernels().secular_sums(alpha, w.data(), model.couplings_sq().data(),
                                              w.size());
  return alpha - model.omega_sub() - s.first;
}

namespace {

struct Root {
  double alpha = 0.0;
  double weight = 0.0;
  double residual = 0.0;
  std::size_t anchor = 0;
  double offset = 0.0;
  bool clamped = false;
};

// Root of f(tau) = base + tau - sum c_n / (tau - d_n) on the open bracket
// (lo, hi), where f(lo+) < 0 < f(hi-). `base` is origin - Omega and d_n the
// bath frequencies relative to the origin.
struct ShiftedSecular {
  double base;
  const std::vector<double>& d;
  std::span<const double> c;

  simd::SecularSums sums(double tau) const {
    return simd::kernels().secular_sums(tau, d.data(), c.data(), d.size());
  }
  double value(double tau) const { return base + tau - sums(tau).first; }
};

double refine(const ShiftedSecular& f, double lo, double hi, double rel_tol) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double tau = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const auto s = f.sums(tau);
    const double val = f.base + tau - s.first;
    if (val == 0.0) return tau;
    if (val < 0.0) lo = tau;
    else hi = tau;
    const double deriv = 1.0 + s.second;
    double next = tau - val / deriv;
    const double width = hi - lo;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - tau);
    tau = next;
    const double scale = std::max(std::fabs(tau), std::numeric_limits<double>::min());
    if (step <= rel_tol * scale || width <= 4.0 * eps * std::max(std::fabs(lo), std::fabs(hi)))
      return tau;
  }
  return tau;
}

void shift_into(std::span<const double> w, double origin, std::vector<double>& d) {
  d.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) d[i] = w[i] - origin;
}

Root solve_one(const SpectralModel& model, std::size_t nu, double rel_tol,
               std::vector<double>& d) {
  const auto w = model.bath_freqs();
  const auto g2 = model.couplings_sq();
  const std::size_t n = w.size();
  const double omega = model.omega_sub();

  double origin = 0.0, lo = 0.0, hi = 0.0;
  std::size_t anchor = 0;
  if (nu == 0 || nu == n) {
    const bool below = nu == 0;
    anchor = below ? 0 : n - 1;
    origin = w[anchor];
    shift_into(w, origin, d);
    ShiftedSecular f{origin - omega, d, g2};
    double total = 0.0;
    for (double v : g2) total += v;
    double reach = total + std::fabs(omega - origin) + 1.0;
    int tries = 0;
    while (true) {
      const double probe = below ? -reach : reach;
      const double v = f.value(probe);
      if (below ? v < 0.0 : v > 0.0) break;
      reach *= 2.0;
      if (++tries > 200 || !std::isfinite(reach)) {
        std::ostringstream os;
        os << "could not bracket the " << (below ? "lowest" : "highest")
           << " normal frequency; last probe offset " << probe << ", f = " << v;
        throw SolverError(os.str());
      }
    }
    lo = below ? -reach : 0.0;
    hi = below ? 0.0 : reach;
  } else {
    const double left = w[nu - 1], right = w[nu];
    const double gap = right - left;
    shift_into(w, left, d);
    ShiftedSecular f{left - omega, d, g2};
    if (f.value(0.5 * gap) > 0.0) {
      anchor = nu - 1;
      origin = left;
      lo = 0.0;
      hi = 0.5 * gap;
    } else {
      anchor = nu;
      origin = right;
      shift_into(w, right, d);
      lo = -(right - left) * 0.5;
      hi = 0.0;
    }
  }

  ShiftedSecular f{origin - omega, d, g2};
  const double tau = refine(f, lo, hi, rel_tol);
  const auto s = f.sums(tau);

  Root r;
  r.alpha = origin + tau;
  r.weight = 1.0 / (1.0 + s.second);
  r.residual = f.base + tau - s.first;
  r.anchor = anchor;
  r.offset = tau;

  // keep strict interlacing when tau is below the resolution of the origin
  const double left_pole = nu == 0 ? -std::numeric_limits<double>::infinity() : w[nu - 1];
  const double right_pole = nu == n ? std::numeric_limits<double>::infinity() : w[nu];
  if (!(r.alpha > left_pole)) {
    r.alpha = std::nextafter(left_pole, right_pole);
    r.clamped = true;
  } else if (!(r.alpha < right_pole)) {
    r.alpha = std::nextafter(right_pole, left_pole);
    r.clamped = true;
  }
  // the anchor is the right pole exactly when anchor == nu
  const bool inside = anchor == nu ? tau < 0.0 : tau > 0.0;
  if (!inside) r.offset = r.alpha - origin;
  return r;
}

}  // namespace

NormalModes solve_normal_modes(const SpectralModel& model, const SolveOptions& opts) {
  if (!(opts.rel_tol > 1e-16 && opts.rel_tol < 1e-6))
    throw ModelError("rel_tol must lie in (1e-16, 1e-6)");
  const std::size_t count = model.size() + 1;
  std::vector<Root> roots(count);
  auto body = [&](std::size_t nu) {
    thread_local std::vector<double> scratch;
    roots[nu] = solve_one(model, nu, opts.rel_tol, scratch);
  };
  if (opts.parallel) {
    parallel_for(count, body);
  } else {
    for (std::size_t nu = 0; nu < count; ++nu) body(nu);
  }

  std::vector<double> alphas(count), weights(count), residuals(count);
  std::vector<std::string> warnings;
  for (std::size_t nu = 0; nu < count; ++nu) {
    alphas[nu] = roots[nu].alpha;
    weights[nu] = roots[nu].weight;
    residuals[nu] = roots[nu].residual;
    if (roots[nu].clamped)
      warnings.push_back("root " + std::to_string(nu) +
                         " is within one ulp of a bath frequency; clamped to keep interlacing");
  }
  std::vector<std::size_t> anchors(count);
  std::vector<double> offsets(count);
  for (std::size_t nu = 0; nu < count; ++nu) {
    anchors[nu] = roots[nu].anchor;
    offsets[nu] = roots[nu].offset;
  }
  // anchors are the nearest bath frequencies
  double dist = std::numeric_limits<double>::infinity();
  for (double o : offsets) dist = std::min(dist, std::fabs(o));
  if (dist < opts.conditioning_floor * model.omega_sub()) {
    std::ostringstream os;
    os << "ill-conditioned: min |alpha - omega| = " << dist;
    warnings.push_back(os.str());
  }
  return NormalModes(model, std::move(alphas), std::move(weights), std::move(residuals),
                     std::move(warnings), std::move(anchors), std::move(offsets));
}

NormalModes dense_oracle(const SpectralModel& model) {
  const std::size_t n = model.size();
  if (n > kDenseOracleMaxN)
    throw ModelError("dense oracle is capped at N = " + std::to_string(kDenseOracleMaxN));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 1, n + 1);
  h(0, 0) = model.omega_sub();
  for (std::size_t i = 0; i < n; ++i) {
    h(0, i + 1) = h(i + 1, 0) = model.couplings()[i];
    h(i + 1, i + 1) = model.bath_freqs()[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
  std::vector<double> alphas(n + 1), weights(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    alphas[k] = es.eigenvalues()(static_cast<Eigen::Index>(k));
    const double v0 = es.eigenvectors()(0, static_cast<Eigen::Index>(k));
    weights[k] = v0 * v0;
  }
  return NormalModes(model, std::move(alphas), std::move(weights));
}

double ClosureReport::max_closure() const noexcept {
  return std::max({completeness, subsystem_bath, bath_bath});
}

ClosureReport verify_closure(const NormalModes& modes) {
  const auto& model = modes.model();
  const auto w = model.bath_freqs();
  const auto g = model.couplings();
  const auto alpha = modes.alphas();
  const auto weight = modes.weights();
  const std::size_t n = w.size();
  const std::size_t count = alpha.size();
  const auto& k = simd::kernels();

  ClosureReport r;
  r.completeness = std::fabs(simd::pairwise_sum(weight.data(), count) - 1.0);

  double asum = 0.0, wsum_total = model.omega_sub(), moment = 0.0;
  for (std::size_t nu = 0; nu < count; ++nu) {
    asum += alpha[nu];
    moment += weight[nu] * alpha[nu];
  }
  for (double v : w) wsum_total += v;
  r.trace = std::fabs(asum - wsum_total) / std::fabs(wsum_total);
  r.first_moment = std::fabs(moment - model.omega_sub()) / model.omega_sub();

  std::vector<double> sub_bath(n), bath_bath(n);
  parallel_for(n, [&](std::size_t i) {
    // poles at omega_i - alpha_nu, evaluated at 0: sums of c_nu / (alpha_nu - omega_i)
    std::vector<double> neg(count), c(count);
    modes.pole_offsets(i, c.data());
    for (std::size_t nu = 0; nu < count; ++nu) {
      neg[nu] = -c[nu];
      c[nu] = weight[nu] / c[nu];
    }
    sub_bath[i] = std::fabs(g[i] * simd::pairwise_sum(c.data(), count));
    double worst = 0.0;
    for (std::size_t j = i; j < n; ++j) {
      modes.pole_offsets(j, neg.data());
      for (double& v : neg) v = -v;
      const double sj = k.secular_sums(0.0, neg.data(), c.data(), count).first;
      const double overlap = g[i] * g[j] * sj - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::fabs(overlap));
    }
    bath_bath[i] = worst;
  });
  for (std::size_t i = 0; i < n; ++i) {
    r.subsystem_bath = std::max(r.subsystem_bath, sub_bath[i]);
    r.bath_bath = std::max(r.bath_bath, bath_bath[i]);
  }
  return r;
}

}  // namespace qbm
