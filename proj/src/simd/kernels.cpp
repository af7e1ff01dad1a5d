#include "thermoporo/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace thermoporo::simd {

namespace {

constexpr KernelTable kScalarTable{Isa::kScalar,          scalar::Dot,     scalar::WeightedDot,
                                   scalar::WeightedGram, scalar::Combine, scalar::CsrMatvec};

#if defined(THERMOPORO_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::kAvx2,          avx2::Dot,     avx2::WeightedDot,
                                 avx2::WeightedGram, avx2::Combine, avx2::CsrMatvec};
#endif

bool CpuHasAvx2() {
#if defined(THERMOPORO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* DefaultTable() {
  if (const char* env = std::getenv("THERMOPORO_ISA")) {
    return &kernels_for(parse_isa(env));
  }
  return CpuHasAvx2() ? &kernels_for(Isa::kAvx2) : &kScalarTable;
}

std::atomic<const KernelTable*>& ActiveSlot() {
  static std::atomic<const KernelTable*> slot{DefaultTable()};
  return slot;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return CpuHasAvx2();
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("kernel ISA not available on this CPU: " +
                                std::string(isa_name(isa)));
  }
#if defined(THERMOPORO_HAVE_AVX2)
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& kernels() { return *ActiveSlot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) { ActiveSlot().store(&kernels_for(isa), std::memory_order_release); }

Isa active_isa() { return kernels().isa; }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  throw std::invalid_argument("unknown kernel ISA '" + std::string(name) + "'");
}

}  // namespace thermoporo::simd
