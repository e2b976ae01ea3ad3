#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "orbitpose/simd.hpp"

using namespace orbitpose::simd;

namespace {

std::vector<double> random_xy(std::mt19937_64& rng, std::size_t count) {
  std::normal_distribution<double> g(100, 30);
  std::vector<double> xy(2 * count);
  for (double& v : xy) v = g(rng);
  return xy;
}

}  // namespace

TEST_CASE("scalar kernels against direct loops") {
  std::mt19937_64 rng(1);
  const auto& k = scalar_kernels();
  for (std::size_t count : {0u, 1u, 3u, 196u, 2156u}) {
    const auto xy = random_xy(rng, count);
    double sum = 0.0;
    std::size_t within = 0;
    for (std::size_t j = 0; j < count; ++j) {
      const double dx = xy[2 * j] - 90, dy = xy[2 * j + 1] - 110;
      sum += std::sqrt(dx * dx + dy * dy);
      if (dx * dx + dy * dy < 400.0) ++within;
    }
    CHECK(k.sum_distances(xy.data(), count, 90, 110) == doctest::Approx(sum).epsilon(1e-14));
    CHECK(k.count_within(xy.data(), count, 90, 110, 400.0, nullptr) == within);
    std::vector<double> out(xy.size());
    k.affine_points(xy.data(), count, 0.5, 3, -2, out.data());
    for (std::size_t j = 0; j < count; ++j) {
      CHECK(out[2 * j] == xy[2 * j] * 0.5 + 3);
      CHECK(out[2 * j + 1] == xy[2 * j + 1] * 0.5 - 2);
    }
  }
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  const KernelTable* avx = avx2_kernels();
  if (avx == nullptr) {
    MESSAGE("AVX2 unavailable on this host; equivalence not exercised");
    return;
  }
  const auto& ref = scalar_kernels();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> thr(0, 60);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t count = trial % 37 + (trial % 5 == 0 ? 2156 : 0);
    const auto xy = random_xy(rng, count);
    const double px = 100 + trial % 7, py = 95 + trial % 11;
    const double a = ref.sum_distances(xy.data(), count, px, py);
    const double b = avx->sum_distances(xy.data(), count, px, py);
    REQUIRE(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));

    const double t = thr(rng);
    std::vector<std::uint8_t> ma(count + 1, 7), mb(count + 1, 7);
    REQUIRE(ref.count_within(xy.data(), count, px, py, t * t, ma.data()) ==
            avx->count_within(xy.data(), count, px, py, t * t, mb.data()));
    REQUIRE(ma == mb);
    REQUIRE(ma[count] == 7);  // no write past the end

    std::vector<double> oa(xy.size()), ob(xy.size());
    ref.affine_points(xy.data(), count, 1.7, -4, 9, oa.data());
    avx->affine_points(xy.data(), count, 1.7, -4, 9, ob.data());
    REQUIRE(oa == ob);
  }
}

TEST_CASE("count_within ties and in-place affine") {
  for (const KernelTable* k : {&scalar_kernels(), avx2_kernels()}) {
    if (k == nullptr) continue;
    // Distance exactly at the threshold is not "within".
    const std::vector<double> xy = {3, 4, 0, 0, 6, 8, 0, 5, -3, -4};
    std::vector<std::uint8_t> mask(5);
    CHECK(k->count_within(xy.data(), 5, 0, 0, 25.0, mask.data()) == 1);
    CHECK(mask == std::vector<std::uint8_t>{0, 1, 0, 0, 0});
    std::vector<double> pts = {1, 2, 3, 4, 5, 6};
    k->affine_points(pts.data(), 3, 2.0, 1.0, -1.0, pts.data());
    CHECK(pts == std::vector<double>{3, 3, 7, 7, 11, 11});
  }
}

TEST_CASE("active kernel selection") {
  set_active_isa(Isa::kScalar);
  CHECK(active_kernels().isa == Isa::kScalar);
  set_active_isa(Isa::kAvx2);
  CHECK(active_kernels().isa == (avx2_kernels() ? Isa::kAvx2 : Isa::kScalar));
  CHECK(isa_name(Isa::kAvx2) == "avx2");
  CHECK(isa_name(Isa::kScalar) == "scalar");
}
