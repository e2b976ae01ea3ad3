#include <cmath>

#include "kernels_internal.hpp"

namespace orbitpose::simd::detail {
namespace {

double sum_distances(const double* xy, std::size_t count, double px, double py) {
  double acc = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const double dx = xy[2 * j] - px;
    const double dy = xy[2 * j + 1] - py;
    acc += std::sqrt(dx * dx + dy * dy);
  }
  return acc;
}

std::size_t count_within(const double* xy, std::size_t count, double px, double py, double threshold_sq,
                         std::uint8_t* mask) {
  std::size_t hits = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double dx = xy[2 * j] - px;
    const double dy = xy[2 * j + 1] - py;
    const bool in = dx * dx + dy * dy < threshold_sq;
    hits += in;
    if (mask) mask[j] = in;
  }
  return hits;
}

void affine_points(const double* xy, std::size_t count, double scale, double ox, double oy, double* out) {
  for (std::size_t j = 0; j < count; ++j) {
    out[2 * j] = xy[2 * j] * scale + ox;
    out[2 * j + 1] = xy[2 * j + 1] * scale + oy;
  }
}

}  // namespace

const KernelTable kScalarTable{Isa::kScalar, &sum_distances, &count_within, &affine_points};

}  // namespace orbitpose::simd::detail
