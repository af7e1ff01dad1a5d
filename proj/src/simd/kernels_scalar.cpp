#include "kernels_impl.hpp"

namespace thermoporo::simd::scalar {

double Dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

double WeightedDot(const double* w, const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += w[k] * a[k] * b[k];
  return sum;
}

void WeightedGram(const double* w, const double* a, std::size_t na, const double* b,
                  std::size_t nb, std::size_t len, double scale, double* out) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * len;
    for (std::size_t j = 0; j < nb; ++j) {
      const double* bj = b + j * len;
      double sum = 0.0;
      for (std::size_t k = 0; k < len; ++k) sum += w[k] * ai[k] * bj[k];
      out[i * nb + j] += scale * sum;
    }
  }
}

void Combine(const double* coeffs, const double* rows, std::size_t nrows, std::size_t len,
             double* out) {
  for (std::size_t k = 0; k < len; ++k) out[k] = 0.0;
  for (std::size_t i = 0; i < nrows; ++i) {
    const double c = coeffs[i];
    const double* row = rows + i * len;
    for (std::size_t k = 0; k < len; ++k) out[k] += c * row[k];
  }
}

void CsrMatvec(const int* row_ptr, const int* cols, const double* vals, std::size_t nrows,
               const double* x, double* y) {
  for (std::size_t r = 0; r < nrows; ++r) {
    double sum = 0.0;
    for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) sum += vals[p] * x[cols[p]];
    y[r] = sum;
  }
}

}  // namespace thermoporo::simd::scalar
