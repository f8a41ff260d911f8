#pragma once

// Canonical split used by every reducing kernel (see kernels.hpp).

#include <cstddef>

namespace qbm::simd::detail {

inline constexpr std::size_t kLeafSize = 64;

template <class Acc, class Leaf>
Acc pairwise_reduce(std::size_t begin, std::size_t len, const Leaf& leaf) {
  if (len <= kLeafSize) return leaf(begin, len);
  const std::size_t mid = (len / 2) & ~std::size_t{3};
  Acc lo = pairwise_reduce<Acc>(begin, mid, leaf);
  Acc hi = pairwise_reduce<Acc>(begin + mid, len - mid, leaf);
  lo += hi;
  return lo;
}

struct Pair {
  double a = 0.0;
  double b = 0.0;
  Pair& operator+=(const Pair& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
};

struct PhaseAcc {
  double re[8] = {};
  double im[8] = {};
  std::size_t m = 0;
  PhaseAcc& operator+=(const PhaseAcc& o) {
    for (std::size_t k = 0; k < m; ++k) {
      re[k] += o.re[k];
      im[k] += o.im[k];
    }
    return *this;
  }
};

inline double finish_lanes(const double* l) { return (l[0] + l[1]) + (l[2] + l[3]); }

}  // namespace qbm::simd::detail
