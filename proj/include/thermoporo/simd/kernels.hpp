#pragma once

// Dense inner-loop kernels used by assembly, field evaluation and the sparse
// matrix-vector product. Every kernel has a scalar reference implementation;
// wider variants are selected at runtime when the CPU supports them.

#include <cstddef>
#include <string_view>

namespace thermoporo::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;

  // sum_k a[k] * b[k]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // sum_k w[k] * a[k] * b[k]
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);

  // out[i * nb + j] += scale * sum_k w[k] * a[i * len + k] * b[j * len + k]
  void (*weighted_gram)(const double* w, const double* a, std::size_t na, const double* b,
                        std::size_t nb, std::size_t len, double scale, double* out);

  // out[k] = sum_i coeffs[i] * rows[i * len + k]
  void (*combine)(const double* coeffs, const double* rows, std::size_t nrows, std::size_t len,
                  double* out);

  // y = A x for a CSR matrix with int indices.
  void (*csr_matvec)(const int* row_ptr, const int* cols, const double* vals, std::size_t nrows,
                     const double* x, double* y);
};

const KernelTable& scalar_kernels();

bool isa_supported(Isa isa);

// Throws std::invalid_argument when the ISA is not supported on this CPU or
// was not compiled in.
const KernelTable& kernels_for(Isa isa);

// Active table; picked once from CPU features and THERMOPORO_ISA
// (scalar|avx2) unless overridden by set_active_isa.
const KernelTable& kernels();

void set_active_isa(Isa isa);
Isa active_isa();

std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

}  // namespace thermoporo::simd
