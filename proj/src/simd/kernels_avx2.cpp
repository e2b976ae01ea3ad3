#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace orbitpose::simd::detail {
namespace {

// Squared distances of four interleaved points to p, in lane order (p0, p2, p1, p3).
inline __m256d squared_distances4(const double* xy, __m256d p) {
  const __m256d a = _mm256_sub_pd(_mm256_loadu_pd(xy), p);
  const __m256d b = _mm256_sub_pd(_mm256_loadu_pd(xy + 4), p);
  return _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
}

double sum_distances(const double* xy, std::size_t count, double px, double py) {
  const __m256d p = _mm256_setr_pd(px, py, px, py);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(squared_distances4(xy + 2 * j, p)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < count; ++j) {
    const double dx = xy[2 * j] - px;
    const double dy = xy[2 * j + 1] - py;
    total += std::sqrt(dx * dx + dy * dy);
  }
  return total;
}

std::size_t count_within(const double* xy, std::size_t count, double px, double py, double threshold_sq,
                         std::uint8_t* mask) {
  const __m256d p = _mm256_setr_pd(px, py, px, py);
  const __m256d thr = _mm256_set1_pd(threshold_sq);
  std::size_t hits = 0;
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    const int bits = _mm256_movemask_pd(_mm256_cmp_pd(squared_distances4(xy + 2 * j, p), thr, _CMP_LT_OQ));
    hits += static_cast<std::size_t>(__builtin_popcount(bits));
    if (mask) {
      mask[j] = bits & 1;
      mask[j + 1] = (bits >> 2) & 1;
      mask[j + 2] = (bits >> 1) & 1;
      mask[j + 3] = (bits >> 3) & 1;
    }
  }
  for (; j < count; ++j) {
    const double dx = xy[2 * j] - px;
    const double dy = xy[2 * j + 1] - py;
    const bool in = dx * dx + dy * dy < threshold_sq;
    hits += in;
    if (mask) mask[j] = in;
  }
  return hits;
}

void affine_points(const double* xy, std::size_t count, double scale, double ox, double oy, double* out) {
  const __m256d s = _mm256_set1_pd(scale);
  const __m256d o = _mm256_setr_pd(ox, oy, ox, oy);
  const std::size_t n = 2 * count;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(xy + k), s), o));
  }
  for (; k < n; k += 2) {
    out[k] = xy[k] * scale + ox;
    out[k + 1] = xy[k + 1] * scale + oy;
  }
}

}  // namespace

const KernelTable kAvx2Table{Isa::kAvx2, &sum_distances, &count_within, &affine_points};

}  // namespace orbitpose::simd::detail
