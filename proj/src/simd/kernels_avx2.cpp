#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace thermoporo::simd::avx2 {

namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

double Dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

double WeightedDot(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_loadu_pd(a + k));
    acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + k), acc);
  }
  double sum = HorizontalSum(acc);
  for (; k < n; ++k) sum += w[k] * a[k] * b[k];
  return sum;
}

void WeightedGram(const double* w, const double* a, std::size_t na, const double* b,
                  std::size_t nb, std::size_t len, double scale, double* out) {
  const std::size_t vec_len = len - len % 4;
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * len;
    for (std::size_t j = 0; j < nb; ++j) {
      const double* bj = b + j * len;
      __m256d acc = _mm256_setzero_pd();
      std::size_t k = 0;
      for (; k < vec_len; k += 4) {
        const __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_loadu_pd(ai + k));
        acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(bj + k), acc);
      }
      double sum = HorizontalSum(acc);
      for (; k < len; ++k) sum += w[k] * ai[k] * bj[k];
      out[i * nb + j] += scale * sum;
    }
  }
}

void Combine(const double* coeffs, const double* rows, std::size_t nrows, std::size_t len,
             double* out) {
  const std::size_t vec_len = len - len % 4;
  std::size_t k = 0;
  for (; k < vec_len; k += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nrows; ++i) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(coeffs[i]), _mm256_loadu_pd(rows + i * len + k), acc);
    }
    _mm256_storeu_pd(out + k, acc);
  }
  for (; k < len; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nrows; ++i) sum += coeffs[i] * rows[i * len + k];
    out[k] = sum;
  }
}

void CsrMatvec(const int* row_ptr, const int* cols, const double* vals, std::size_t nrows,
               const double* x, double* y) {
  for (std::size_t r = 0; r < nrows; ++r) {
    const int begin = row_ptr[r];
    const int end = row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    int p = begin;
    for (; p + 4 <= end; p += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + p));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(vals + p), xv, acc);
    }
    double sum = HorizontalSum(acc);
    for (; p < end; ++p) sum += vals[p] * x[cols[p]];
    y[r] = sum;
  }
}

}  // namespace thermoporo::simd::avx2

#endif  // x86_64
