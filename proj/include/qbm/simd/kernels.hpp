#pragma once

// Data-parallel inner loops shared by the eigensolver, the time evolution and
// the continuum quadrature. Every kernel exists as a scalar reference and, on
// x86-64, as an AVX2 variant picked at runtime.
//
// Reductions follow one canonical order in both backends: ranges longer than
// 64 terms are split at floor(len/2) rounded down to a multiple of 4 and the
// halves added pairwise; leaves accumulate term i into lane (i mod 4) and
// finish with (l0 + l1) + (l2 + l3). Rational kernels are therefore
// bit-identical across backends. Trigonometric kernels differ only by the
// sin/cos evaluation (libm in the scalar reference, a Cody-Waite reduced
// polynomial in AVX2).

#include <complex>
#include <cstddef>
#include <string_view>

namespace qbm::simd {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

struct SecularSums {
  double first = 0.0;   // sum c_i / (x - d_i)
  double second = 0.0;  // sum c_i / (x - d_i)^2
};

/// Largest number of weight vectors accepted by one phase_sums call.
inline constexpr std::size_t kMaxPhaseWeights = 8;

struct KernelTable {
  Backend backend;

  SecularSums (*secular_sums)(double x, const double* d, const double* c,
                              std::size_t n);

  /// sum (c_re[i] + i c_im[i]) / (x - d[i])
  std::complex<double> (*cauchy_sum)(double x, const double* d,
                                     const double* c_re, const double* c_im,
                                     std::size_t n);

  /// out[k] = sum_i w[k][i] exp(-i d[i] t) for k < m (m <= kMaxPhaseWeights)
  void (*phase_sums)(double t, const double* d, std::size_t n,
                     const double* const* w, std::size_t m,
                     std::complex<double>* out);

  /// re[i] = cos(d[i] t), im[i] = -sin(d[i] t)
  void (*phasors)(double t, const double* d, std::size_t n, double* re,
                  double* im);
};

/// Plain sum in the canonical reduction order (backend independent).
double pairwise_sum(const double* x, std::size_t n);

const KernelTable& scalar_kernels();

/// nullptr when the binary was built without AVX2 kernels or the CPU lacks
/// AVX2/FMA.
const KernelTable* avx2_kernels();

/// Kernels in use. Chosen once from the CPU and the QBM_SIMD environment
/// variable (`scalar`, `avx2` or `auto`).
const KernelTable& kernels();

Backend active_backend();

/// Overrides the runtime choice; used by tests and the CLI `--simd` flag.
/// Returns false (and leaves the choice unchanged) if `b` is unavailable.
bool set_backend(Backend b);

}  // namespace qbm::simd
