#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "orbitpose/error.hpp"
#include "orbitpose/keypoints.hpp"

using namespace orbitpose;

namespace {

MeshModel unit_cube() { return make_box_mesh(Vec3(1, 1, 1)); }

// 5th percentile of the minimum pairwise distance over random area-uniform 8-point sets.
double random_subset_min_distance_p5(const MeshModel& mesh, int n, int subsets) {
  std::vector<double> mins;
  for (int s = 0; s < subsets; ++s) mins.push_back(oracle::min_pairwise_distance(sample_surface(mesh, n, 1000 + s)));
  std::sort(mins.begin(), mins.end());
  return mins[static_cast<std::size_t>(0.05 * subsets)];
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("orbitpose_test_" + name);
}

}  // namespace

TEST_CASE("cube selection beats the random-subset baseline") {
  const auto cube = unit_cube();
  const double p5 = random_subset_min_distance_p5(cube, 8, 1000);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto kps = select_keypoints(cube, 8, seed);
    REQUIRE(kps.size() == 8);
    CHECK(oracle::min_pairwise_distance(kps.points) >= p5);
  }
}

TEST_CASE("requested count is returned exactly and points lie on the surface") {
  const auto mesh = make_cygnus_like_mesh();
  for (int n : {4, 11, 20, 32}) {
    const auto kps = select_keypoints(mesh, n, 3);
    REQUIRE(kps.size() == static_cast<std::size_t>(n));
    CHECK_NOTHROW(kps.validate());
    for (const auto& p : kps.points) CHECK(distance_to_mesh(mesh, p) < 1e-9);
  }
}

TEST_CASE("single triangle yields three distinct points on it") {
  MeshModel tri{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}};
  const auto kps = select_keypoints(tri, 3, 1);
  REQUIRE(kps.size() == 3);
  CHECK(oracle::min_pairwise_distance(kps.points) > 0.0);
  for (const auto& p : kps.points) CHECK(distance_to_mesh(tri, p) < 1e-12);
  try {
    select_keypoints(tri, 4, 1);
    FAIL("expected InsufficientGeometry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientGeometry);
  }
}

TEST_CASE("selection is deterministic per seed") {
  const auto mesh = make_cygnus_like_mesh();
  const auto a = select_keypoints(mesh, 20, 77);
  const auto b = select_keypoints(mesh, 20, 77);
  const auto c = select_keypoints(mesh, 20, 78);
  CHECK(a.points == b.points);
  CHECK(a.points != c.points);
}

TEST_CASE("spread exceeds random subsets on average over 100 seeds") {
  const auto mesh = make_cygnus_like_mesh();
  int wins = 0;
  double sel_sum = 0, rnd_sum = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double sel = oracle::mean_nearest_neighbor(select_keypoints(mesh, 11, seed).points);
    const double rnd = oracle::mean_nearest_neighbor(sample_surface(mesh, 11, 5000 + seed));
    sel_sum += sel;
    rnd_sum += rnd;
    if (sel > rnd) ++wins;
  }
  MESSAGE("selected ", sel_sum / 100, " random ", rnd_sum / 100, " wins ", wins);
  CHECK(sel_sum > rnd_sum);
  CHECK(wins >= 95);
}

TEST_CASE("poisson radius bound") {
  CHECK(poisson_radius_bound(6.0, 8) == doctest::Approx(std::sqrt(6.0 / (2 * std::sqrt(3.0) * 8))));
  CHECK_THROWS_AS(poisson_radius_bound(6.0, 0), Error);
}

TEST_CASE("eliminate_samples keeps the requested number in candidate order") {
  const auto cands = sample_surface(unit_cube(), 40, 2);
  const auto keep = eliminate_samples(cands, 8, poisson_radius_bound(6.0, 8));
  REQUIRE(keep.size() == 8);
  CHECK(std::is_sorted(keep.begin(), keep.end()));
  CHECK(std::adjacent_find(keep.begin(), keep.end()) == keep.end());
}

TEST_CASE("options validation") {
  SelectionOptions opts;
  opts.oversample_factor = 0.5;
  CHECK_THROWS_AS(select_keypoints(unit_cube(), 8, 0, opts), Error);
  CHECK_THROWS_AS(select_keypoints(unit_cube(), 0, 0), Error);
}

TEST_CASE("keypoint table round trip") {
  const auto kps = select_keypoints(make_cygnus_like_mesh(), 11, 4);
  std::stringstream ss;
  write_keypoint_table(ss, kps);
  const auto back = parse_keypoint_table(ss);
  REQUIRE(back.size() == kps.size());
  for (std::size_t i = 0; i < kps.size(); ++i) CHECK(back.points[i] == kps.points[i]);
}

TEST_CASE("SPEED-style keypoints from configuration") {
  const auto path = temp_file("speed.txt");
  const auto write_rows = [&](int rows, bool duplicate) {
    std::ofstream out(path);
    out << "# test keypoints\n";
    for (int i = 0; i < rows; ++i) {
      const int v = duplicate && i == rows - 1 ? 0 : i;
      out << 0.1 * v << ' ' << -0.2 * v << ' ' << 0.05 * v * v << '\n';
    }
  };

  write_rows(11, false);
  CHECK(speed_keypoints(path).size() == kSpeedKeypointCount);

  write_rows(10, false);
  try {
    speed_keypoints(path);
    FAIL("expected MissingConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingConfig);
  }

  write_rows(11, true);
  CHECK_THROWS_AS(speed_keypoints(path), Error);

  std::filesystem::remove(path);
  try {
    speed_keypoints(path);
    FAIL("expected MissingConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingConfig);
  }
}
