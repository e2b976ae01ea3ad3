#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace orbitpose::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() { return detail::kScalarTable; }

const KernelTable* avx2_kernels() {
#if defined(ORBITPOSE_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* pick_default() {
  const char* env = std::getenv("ORBITPOSE_SIMD");
  if (env && std::string_view(env) == "scalar") return &scalar_kernels();
  if (const KernelTable* avx2 = avx2_kernels()) return avx2;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{pick_default()};
  return slot;
}

}  // namespace

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) {
  const KernelTable* table = &scalar_kernels();
  if (isa == Isa::kAvx2 && avx2_kernels()) table = avx2_kernels();
  active_slot().store(table, std::memory_order_release);
}

}  // namespace orbitpose::simd
