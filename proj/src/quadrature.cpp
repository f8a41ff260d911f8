#include "qbm/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "qbm/error.hpp"

namespace qbm::quad {

void check_tolerance(double tol) {
  if (!(tol > 1e-14 && tol < 1e-6))
    throw ModelError("quadrature tolerance must lie in (1e-14, 1e-6)");
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;

// Maps [a, inf) onto [0, 1) with w = a + s / (1 - s).
template <class F>
auto semi_infinite(const F& f, double a) {
  return [=](double s) {
    const double d = 1.0 - s;
    return f(a + s / d) / (d * d);
  };
}

template <class T>
struct Piece {
  double a, b;
  T value;
  double error, l1;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <class T, class F>
Piece<T> rule(const F& f, double a, double b) {
  double err = 0.0, l1 = 0.0;
  const T v = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
  // with max_depth = 0 Boost reports the error on the reference interval [-1, 1]
  return {a, b, v, err * 0.5 * (b - a), l1};
}

template <class T, class F>
void run(const F& f, std::vector<double> pts, double tol, T& value, double& error, double& l1,
         std::size_t& intervals) {
  std::priority_queue<Piece<T>> heap;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i + 1] > pts[i]) heap.push(rule<T>(f, pts[i], pts[i + 1]));

  auto totals = [&] {
    auto copy = heap;
    T v{};
    double e = 0.0, l = 0.0;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      l += copy.top().l1;
      copy.pop();
    }
    value = v;
    error = e;
    l1 = l;
  };

  double err_sum = 0.0, l1_sum = 0.0;
  {
    auto copy = heap;
    while (!copy.empty()) {
      err_sum += copy.top().error;
      l1_sum += copy.top().l1;
      copy.pop();
    }
  }
  while (!heap.empty() && err_sum > tol * l1_sum && heap.size() < kMaxIntervals) {
    const Piece<T> worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    const auto left = rule<T>(f, worst.a, mid);
    const auto right = rule<T>(f, mid, worst.b);
    err_sum += left.error + right.error - worst.error;
    l1_sum += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  intervals = heap.size();
  totals();  // re-sum from scratch; the running sums only steer refinement
  if (!std::isfinite(error) || (error > tol * l1 && error > 4.0 * std::numeric_limits<double>::min())) {
    std::ostringstream os;
    os << "quadrature did not converge: error estimate " << error << " against tolerance "
       << tol * l1 << " after " << intervals << " intervals";
    throw QuadratureError(os.str(), error);
  }
}

std::vector<double> points(double a, double b, std::span<const double> breaks) {
  std::vector<double> pts{a};
  std::vector<double> inner;
  for (double x : breaks)
    if (x > a && x < b) inner.push_back(x);
  std::sort(inner.begin(), inner.end());
  pts.insert(pts.end(), inner.begin(), inner.end());
  pts.push_back(b);
  return pts;
}

template <class T, class F>
void dispatch(const F& f, double a, double b, double tol, std::span<const double> breaks,
              T& value, double& error, double& l1, std::size_t& intervals) {
  if (!(b > a)) {
    value = T{};
    error = l1 = 0.0;
    intervals = 0;
    return;
  }
  if (std::isinf(b)) {
    // finite part up to the last breakpoint, mapped tail beyond it
    auto pts = points(a, std::numeric_limits<double>::max(), breaks);
    pts.pop_back();
    const double tail_start = pts.back();
    T v1{}, v2{};
    double e1 = 0.0, l1a = 0.0, e2 = 0.0, l1b = 0.0;
    std::size_t n1 = 0, n2 = 0;
    if (pts.size() > 1) run<T>(f, pts, tol, v1, e1, l1a, n1);
    run<T>(semi_infinite(f, tail_start), std::vector<double>{0.0, 1.0}, tol, v2, e2, l1b, n2);
    value = v1 + v2;
    error = e1 + e2;
    l1 = l1a + l1b;
    intervals = n1 + n2;
    return;
  }
  run<T>(f, points(a, b, breaks), tol, value, error, l1, intervals);
}

}  // namespace

Result integrate(const RealFn& f, double a, double b, double tol, std::span<const double> breaks) {
  Result r;
  dispatch<double>(f, a, b, tol, breaks, r.value, r.error, r.l1, r.intervals);
  return r;
}

ComplexResult integrate(const ComplexFn& f, double a, double b, double tol,
                        std::span<const double> breaks) {
  ComplexResult r;
  dispatch<std::complex<double>>(f, a, b, tol, breaks, r.value, r.error, r.l1, r.intervals);
  return r;
}

Result principal_value(const RealFn& f, double a, double b, double x, double tol) {
  if (!(x > a && x < b)) throw ModelError("principal value point must lie inside the interval");
  const double fx = f(x);
  auto g = [&](double w) {
    const double d = x - w;
    return d == 0.0 ? 0.0 : (f(w) - fx) / d;
  };
  const double brk[1] = {x};
  Result r = integrate(RealFn(g), a, b, tol, brk);
  r.value += fx * std::log((x - a) / (b - x));
  return r;
}

ComplexResult cauchy_integral(const RealFn& f,
                              const std::function<std::complex<double>(std::complex<double>)>& fz,
                              double a, double b, std::complex<double> z, double tol) {
  const std::complex<double> fzz = fz(z);
  auto g = [&](double w) { return (f(w) - fzz) / (z - w); };
  std::vector<double> brk;
  const double x = z.real(), y = std::fabs(z.imag());
  for (double k : {-8.0, -1.0, 0.0, 1.0, 8.0}) brk.push_back(x + k * y);
  ComplexResult r = integrate(ComplexFn(g), a, b, tol, brk);
  r.value += fzz * (std::log(z - a) - std::log(z - b));
  return r;
}

const Rule& gauss_legendre_10() {
  static const Rule r = [] {
    using G = boost::math::quadrature::gauss<double, 10>;
    Rule out;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    // boost stores the non-negative half
    for (std::size_t i = x.size(); i-- > 0;) {
      if (x[i] == 0.0) continue;
      out.nodes.push_back(-x[i]);
      out.weights.push_back(w[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.nodes.push_back(x[i]);
      out.weights.push_back(w[i]);
    }
    return out;
  }();
  return r;
}

Rule composite_rule(double a, double b, std::size_t panels) {
  const Rule& base = gauss_legendre_10();
  Rule out;
  out.nodes.reserve(panels * base.nodes.size());
  out.weights.reserve(panels * base.nodes.size());
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      out.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
      out.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return out;
}

}  // namespace qbm::quad
