#pragma once

// Data-parallel inner loops over interleaved 2-D point arrays (x0, y0, x1, y1, ...).
// Every kernel has a scalar reference; vector variants are selected once at runtime from
// CPU features and can be forced with ORBITPOSE_SIMD=scalar|avx2.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace orbitpose::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  /// Σ_j ‖xy_j − p‖.
  double (*sum_distances)(const double* xy, std::size_t count, double px, double py);
  /// Number of j with ‖xy_j − p‖² < threshold_sq. When `mask` is non-null, mask[j] is set to 0 or 1.
  /// Results are bit-identical across ISAs.
  std::size_t (*count_within)(const double* xy, std::size_t count, double px, double py, double threshold_sq,
                              std::uint8_t* mask);
  /// out_j = xy_j · scale + (ox, oy). `out` may alias `xy`.
  void (*affine_points)(const double* xy, std::size_t count, double scale, double ox, double oy, double* out);
};

const KernelTable& scalar_kernels();
/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

const KernelTable& active_kernels();
/// Overrides the runtime choice (tests and benchmarks). Falls back to scalar if unavailable.
void set_active_isa(Isa isa);

}  // namespace orbitpose::simd
