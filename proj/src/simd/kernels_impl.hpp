#pragma once

// Raw-pointer entry points for each ISA. Kept free of standard-library
// templates so the AVX2 translation unit cannot leak wide instructions into
// shared inline code.

#include <cstddef>

namespace thermoporo::simd {

#define THERMOPORO_KERNEL_DECLS                                                               \
  double Dot(const double* a, const double* b, std::size_t n);                                \
  double WeightedDot(const double* w, const double* a, const double* b, std::size_t n);       \
  void WeightedGram(const double* w, const double* a, std::size_t na, const double* b,        \
                    std::size_t nb, std::size_t len, double scale, double* out);              \
  void Combine(const double* coeffs, const double* rows, std::size_t nrows, std::size_t len,  \
               double* out);                                                                  \
  void CsrMatvec(const int* row_ptr, const int* cols, const double* vals, std::size_t nrows, \
                 const double* x, double* y);

namespace scalar {
THERMOPORO_KERNEL_DECLS
}

namespace avx2 {
THERMOPORO_KERNEL_DECLS
}

#undef THERMOPORO_KERNEL_DECLS

}  // namespace thermoporo::simd
