// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
// FMA is deliberately not used so lanes round exactly like the scalar code.

#include <immintrin.h>

#include <cmath>

#include "qbm/simd/kernels.hpp"
#include "qbm/simd/sincos.hpp"
#include "reduce.hpp"

namespace qbm::simd {
namespace {

using detail::finish_lanes;
using detail::Pair;
using detail::PhaseAcc;
using detail::pairwise_reduce;

// Lane-for-lane transcription of sincos_poly.
inline void sincos_pd(__m256d x, __m256d& s, __m256d& c) {
  using namespace sincos_constants;
  const __m256d j = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(j, _mm256_set1_pd(kPio2Hi)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(j, _mm256_set1_pd(kPio2Mid)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(j, _mm256_set1_pd(kPio2Lo)));
  const __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_set1_pd(kSin[0]);
  for (int k = 1; k < 6; ++k)
    ps = _mm256_add_pd(_mm256_mul_pd(ps, z), _mm256_set1_pd(kSin[k]));
  __m256d pc = _mm256_set1_pd(kCos[0]);
  for (int k = 1; k < 6; ++k)
    pc = _mm256_add_pd(_mm256_mul_pd(pc, z), _mm256_set1_pd(kCos[k]));
  const __m256d sr = _mm256_add_pd(r, _mm256_mul_pd(r, _mm256_mul_pd(z, ps)));
  const __m256d cr =
      _mm256_add_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(_mm256_set1_pd(0.5), z)),
                    _mm256_mul_pd(z, _mm256_mul_pd(z, pc)));

  const __m128i q32 = _mm256_cvtpd_epi32(j);
  const __m256i q = _mm256_cvtepi32_epi64(q32);
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
  const __m256d neg_s =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, two), two));
  const __m256d neg_c = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(_mm256_and_si256(_mm256_add_epi64(q, one), two), two));

  const __m256d ss = _mm256_blendv_pd(sr, cr, swap);
  const __m256d cc = _mm256_blendv_pd(cr, sr, swap);
  const __m256d sign = _mm256_set1_pd(-0.0);
  s = _mm256_xor_pd(ss, _mm256_and_pd(neg_s, sign));
  c = _mm256_xor_pd(cc, _mm256_and_pd(neg_c, sign));
}

// Falls back to the scalar routine lane by lane when any argument is outside
// the exact-reduction range.
inline void sincos_block(const double* theta, double* s, double* c) {
  bool in_range = true;
  for (int k = 0; k < 4; ++k)
    in_range = in_range && std::fabs(theta[k]) < sincos_constants::kReduceLimit;
  if (in_range) {
    __m256d vs, vc;
    sincos_pd(_mm256_loadu_pd(theta), vs, vc);
    _mm256_storeu_pd(s, vs);
    _mm256_storeu_pd(c, vc);
  } else {
    for (int k = 0; k < 4; ++k) sincos_poly(theta[k], s[k], c[k]);
  }
}

SecularSums secular_sums_avx2(double x, const double* d, const double* c,
                              std::size_t n) {
  auto leaf = [=](std::size_t b, std::size_t len) {
    const __m256d vx = _mm256_set1_pd(x);
    __m256d a1 = _mm256_setzero_pd(), a2 = _mm256_setzero_pd();
    const std::size_t full = len & ~std::size_t{3};
    for (std::size_t i = 0; i < full; i += 4) {
      const __m256d diff = _mm256_sub_pd(vx, _mm256_loadu_pd(d + b + i));
      const __m256d q = _mm256_div_pd(_mm256_loadu_pd(c + b + i), diff);
      a1 = _mm256_add_pd(a1, q);
      a2 = _mm256_add_pd(a2, _mm256_div_pd(q, diff));
    }
    alignas(32) double l1[4], l2[4];
    _mm256_store_pd(l1, a1);
    _mm256_store_pd(l2, a2);
    for (std::size_t i = full; i < len; ++i) {
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

std::complex<double> cauchy_sum_avx2(double x, const double* d,
                                     const double* c_re, const double* c_im,
                                     std::size_t n) {
  auto leaf = [=](std::size_t b, std::size_t len) {
    const __m256d vx = _mm256_set1_pd(x);
    __m256d ar = _mm256_setzero_pd(), ai = _mm256_setzero_pd();
    const std::size_t full = len & ~std::size_t{3};
    for (std::size_t i = 0; i < full; i += 4) {
      const __m256d diff = _mm256_sub_pd(vx, _mm256_loadu_pd(d + b + i));
      ar = _mm256_add_pd(ar, _mm256_div_pd(_mm256_loadu_pd(c_re + b + i), diff));
      ai = _mm256_add_pd(ai, _mm256_div_pd(_mm256_loadu_pd(c_im + b + i), diff));
    }
    alignas(32) double lr[4], li[4];
    _mm256_store_pd(lr, ar);
    _mm256_store_pd(li, ai);
    for (std::size_t i = full; i < len; ++i) {
      const double diff = x - d[b + i];
      lr[i & 3] += c_re[b + i] / diff;
      li[i & 3] += c_im[b + i] / diff;
    }
    return Pair{finish_lanes(lr), finish_lanes(li)};
  };
  const Pair p = pairwise_reduce<Pair>(0, n, leaf);
  return {p.a, p.b};
}

void phase_sums_avx2(double t, const double* d, std::size_t n,
                     const double* const* w, std::size_t m,
                     std::complex<double>* out) {
  auto leaf = [=](std::size_t b, std::size_t len) {
    __m256d ar[kMaxPhaseWeights], ai[kMaxPhaseWeights];
    for (std::size_t k = 0; k < m; ++k) ar[k] = ai[k] = _mm256_setzero_pd();
    const __m256d vt = _mm256_set1_pd(t);
    const std::size_t full = len & ~std::size_t{3};
    alignas(32) double theta[4], sn[4], cs[4];
    for (std::size_t i = 0; i < full; i += 4) {
      _mm256_store_pd(theta, _mm256_mul_pd(_mm256_loadu_pd(d + b + i), vt));
      sincos_block(theta, sn, cs);
      const __m256d vs = _mm256_load_pd(sn), vc = _mm256_load_pd(cs);
      for (std::size_t k = 0; k < m; ++k) {
        const __m256d wk = _mm256_loadu_pd(w[k] + b + i);
        ar[k] = _mm256_add_pd(ar[k], _mm256_mul_pd(wk, vc));
        ai[k] = _mm256_add_pd(ai[k], _mm256_mul_pd(wk, vs));
      }
    }
    PhaseAcc acc;
    acc.m = m;
    alignas(32) double lr[4], li[4];
    for (std::size_t k = 0; k < m; ++k) {
      _mm256_store_pd(lr, ar[k]);
      _mm256_store_pd(li, ai[k]);
      for (std::size_t i = full; i < len; ++i) {
        double s1, c1;
        sincos_poly(d[b + i] * t, s1, c1);
        lr[i & 3] += w[k][b + i] * c1;
        li[i & 3] += w[k][b + i] * s1;
      }
      acc.re[k] = finish_lanes(lr);
      acc.im[k] = finish_lanes(li);
    }
    return acc;
  };
  PhaseAcc acc;
  acc.m = m;
  if (n > 0) acc = pairwise_reduce<PhaseAcc>(0, n, leaf);
  for (std::size_t k = 0; k < m; ++k) out[k] = {acc.re[k], -acc.im[k]};
}

void phasors_avx2(double t, const double* d, std::size_t n, double* re,
                  double* im) {
  const __m256d vt = _mm256_set1_pd(t);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const std::size_t full = n & ~std::size_t{3};
  alignas(32) double theta[4], sn[4], cs[4];
  for (std::size_t i = 0; i < full; i += 4) {
    _mm256_store_pd(theta, _mm256_mul_pd(_mm256_loadu_pd(d + i), vt));
    sincos_block(theta, sn, cs);
    _mm256_storeu_pd(re + i, _mm256_load_pd(cs));
    _mm256_storeu_pd(im + i, _mm256_xor_pd(_mm256_load_pd(sn), sign));
  }
  for (std::size_t i = full; i < n; ++i) {
    double s1, c1;
    sincos_poly(d[i] * t, s1, c1);
    re[i] = c1;
    im[i] = -s1;
  }
}

}  // namespace

namespace detail {
const KernelTable& avx2_table() {
  static const KernelTable table{Backend::avx2, secular_sums_avx2,
                                 cauchy_sum_avx2, phase_sums_avx2,
                                 phasors_avx2};
  return table;
}
}  // namespace detail

}  // namespace qbm::simd
