#include <cmath>

#include "qbm/simd/kernels.hpp"
#include "reduce.hpp"

namespace qbm::simd {
namespace {

using detail::finish_lanes;
using detail::Pair;
using detail::PhaseAcc;
using detail::pairwise_reduce;

SecularSums secular_sums_scalar(double x, const double* d, const double* c,
                                std::size_t n) {
  auto leaf = [=](std::size_t b, std::size_t len) {
    double l1[4] = {}, l2[4] = {};
    for (std::size_t i = 0; i < len; ++i) {
      const double diff = x - d[b + i];
      const double q = c[b + i] / diff;
      l1[i & 3] += q;
      l2[i & 3] += q / diff;
    }
    return Pair{finish_lanes(l1), finish_lanes(l2)};
  };
  const Pair p = pairwise_reduce<Pair>(0, n, leaf);
  return {p.a, p.b};
}

std::complex<double> cauchy_sum_scalar(double x, const double* d,
                                       const double* c_re, const double* c_im,
                                       std::size_t n) {
  auto leaf = [=](std::size_t b, std::size_t len) {
    double lr[4] = {}, li[4] = {};
    for (std::size_t i = 0; i < len; ++i) {
      const double diff = x - d[b + i];
      lr[i & 3] += c_re[b + i] / diff;
      li[i & 3] += c_im[b + i] / diff;
    }
    return Pair{finish_lanes(lr), finish_lanes(li)};
  };
  const Pair p = pairwise_reduce<Pair>(0, n, leaf);
  return {p.a, p.b};
}

void phase_sums_scalar(double t, const double* d, std::size_t n,
                       const double* const* w, std::size_t m,
                       std::complex<double>* out) {
  auto leaf = [=](std::size_t b, std::size_t len) {
    double lr[kMaxPhaseWeights][4] = {}, li[kMaxPhaseWeights][4] = {};
    for (std::size_t i = 0; i < len; ++i) {
      const double theta = d[b + i] * t;
      const double cs = std::cos(theta);
      const double sn = std::sin(theta);
      for (std::size_t k = 0; k < m; ++k) {
        lr[k][i & 3] += w[k][b + i] * cs;
        li[k][i & 3] += w[k][b + i] * sn;
      }
    }
    PhaseAcc acc;
    acc.m = m;
    for (std::size_t k = 0; k < m; ++k) {
      acc.re[k] = finish_lanes(lr[k]);
      acc.im[k] = finish_lanes(li[k]);
    }
    return acc;
  };
  PhaseAcc acc;
  acc.m = m;
  if (n > 0) acc = pairwise_reduce<PhaseAcc>(0, n, leaf);
  for (std::size_t k = 0; k < m; ++k) out[k] = {acc.re[k], -acc.im[k]};
}

void phasors_scalar(double t, const double* d, std::size_t n, double* re,
                    double* im) {
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = d[i] * t;
    re[i] = std::cos(theta);
    im[i] = -std::sin(theta);
  }
}

}  // namespace

double pairwise_sum(const double* x, std::size_t n) {
  auto leaf = [=](std::size_t b, std::size_t len) {
    double l[4] = {};
    for (std::size_t i = 0; i < len; ++i) l[i & 3] += x[b + i];
    return Pair{finish_lanes(l), 0.0};
  };
  return detail::pairwise_reduce<Pair>(0, n, leaf).a;
}

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::scalar, secular_sums_scalar,
                                 cauchy_sum_scalar, phase_sums_scalar,
                                 phasors_scalar};
  return table;
}

}  // namespace qbm::simd
