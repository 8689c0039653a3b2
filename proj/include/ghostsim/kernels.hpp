#pragma once

#include <cstddef>

namespace ghostsim::detail {

// Four independent partial sums let the compiler keep several multiply-adds
// in flight without -ffast-math. Summation order is fixed, so results are
// reproducible run to run.
inline double dot_product(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline void accumulate_scaled(double* dst, double factor, const double* src,
                              std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) dst[i] += factor * src[i];
}

}  // namespace ghostsim::detail
