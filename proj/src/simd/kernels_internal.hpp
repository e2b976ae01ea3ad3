#pragma once

#include "orbitpose/simd.hpp"

namespace orbitpose::simd::detail {

extern const KernelTable kScalarTable;
#if defined(ORBITPOSE_HAVE_AVX2_TU)
extern const KernelTable kAvx2Table;
#endif

}  // namespace orbitpose::simd::detail
