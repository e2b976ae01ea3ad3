#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "orbitpose/error.hpp"
#include "orbitpose/geometry.hpp"
#include "orbitpose/mesh.hpp"

using namespace orbitpose;
using std::numbers::pi;

namespace {
bool near(const Vec3& a, const Vec3& b, double tol) { return (a - b).norm() <= tol; }
}  // namespace

TEST_CASE("rotate_point basic cases") {
  CHECK(near(rotate_point(Quaternion::identity(), Vec3(1, 2, 3)), Vec3(1, 2, 3), 1e-15));
  const auto z180 = Quaternion::from_axis_angle(Vec3::UnitZ(), pi);
  CHECK(near(rotate_point(z180, Vec3(1, 0, 0)), Vec3(-1, 0, 0), 1e-12));
  const auto z90 = Quaternion::from_axis_angle(Vec3::UnitZ(), pi / 2);
  CHECK(near(rotate_point(z90, Vec3(1, 0, 0)), Vec3(0, 1, 0), 1e-12));
}

TEST_CASE("normalizing constructor yields unit norm and rejects zero") {
  const auto q = Quaternion::normalized(3, -1, 2, 7);
  CHECK(std::abs(q.norm() - 1.0) < 1e-9);
  CHECK_THROWS_AS(Quaternion::normalized(0, 0, 0, 0), Error);
}

TEST_CASE("q and -q rotate a basis vector identically") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const auto q = oracle::random_unit_quaternion(rng);
    CHECK(near(rotate_point(q, Vec3::UnitX()), rotate_point(-q, Vec3::UnitX()), 1e-12));
  }
}

TEST_CASE("rotation preserves norm and composes") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int k = 0; k < 10000; ++k) {
    const auto q1 = oracle::random_unit_quaternion(rng);
    const auto q2 = oracle::random_unit_quaternion(rng);
    const Vec3 p(g(rng), g(rng), g(rng));
    REQUIRE(std::abs(rotate_point(q1, p).norm() - p.norm()) < 1e-9);
    REQUIRE(near(rotate_point(q1 * q2, p), rotate_point(q1, rotate_point(q2, p)), 1e-9));
  }
}

TEST_CASE("rotation matrix round trip") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    const auto q = oracle::random_unit_quaternion(rng);
    const Mat3 r = q.to_rotation_matrix();
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
    const auto back = Quaternion::from_rotation_matrix(r);
    CHECK(std::abs(std::abs(back.dot(q)) - 1.0) < 1e-12);
    CHECK(back.w >= 0.0);
  }
}

TEST_CASE("camera_from_fov") {
  CHECK(camera_from_fov(90, 1000, 1000).focal_px == doctest::Approx(500).epsilon(1e-12));
  // Reference values computed independently: 950 / tan(17.55 deg), 512 / tan(19.8 deg).
  CHECK(camera_from_fov(35.1, 1900, 1200).focal_px == doctest::Approx(3003.8720958043855).epsilon(1e-12));
  CHECK(camera_from_fov(39.6, 1024, 1024).focal_px == doctest::Approx(1422.134709204467).epsilon(1e-12));
  const auto cam = camera_from_fov(35.1, 1900, 1200);
  CHECK(cam.principal_point.x() == 950);
  CHECK(cam.principal_point.y() == 600);
  for (double bad : {0.0, 180.0, -5.0, 200.0}) {
    try {
      camera_from_fov(bad, 100, 100);
      FAIL("expected InvalidFov");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidFov);
    }
  }
}

TEST_CASE("project_points") {
  const auto cam = camera_preset("cygnus");
  const Pose identity{};
  const Vec3 pts[] = {{0, 0, 10}, {1, 0, 10}};
  const auto uv = project_points(identity, cam, pts);
  CHECK(uv[0].x() == doctest::Approx(512));
  CHECK(uv[0].y() == doctest::Approx(512));
  CHECK(uv[1].x() == doctest::Approx(512 + cam.focal_px / 10));
  CHECK(uv[1].y() == doctest::Approx(512));

  const Vec3 behind[] = {{0, 0, -1}};
  try {
    project_points(identity, cam, behind);
    FAIL("expected PointBehindCamera");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPointBehindCamera);
  }
}

TEST_CASE("project_points matches an independent projection and is sign-invariant in q") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3), d(35, 75);
  const auto cam = camera_preset("cygnus");
  for (int k = 0; k < 200; ++k) {
    Pose pose{oracle::random_unit_quaternion(rng), Vec3(u(rng), u(rng), d(rng))};
    std::vector<Vec3> pts;
    for (int i = 0; i < 20; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    const auto got = project_points(pose, cam, pts);
    const auto want = oracle::project_all(pose, cam, pts);
    Pose flipped = pose;
    flipped.rotation = -pose.rotation;
    const auto got_neg = project_points(flipped, cam, pts);
    for (int i = 0; i < 20; ++i) {
      REQUIRE((got[i] - want[i]).norm() < 1e-9);
      REQUIRE((got[i] - got_neg[i]).norm() < 1e-9);
    }
  }
}

TEST_CASE("OBJ parsing") {
  std::istringstream in(
      "# quad\n"
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
      "vn 0 0 1\n"
      "f 1/1/1 2/2/1 3/3/1 4/4/1\n");
  const auto mesh = parse_obj(in);
  CHECK(mesh.vertices.size() == 4);
  REQUIRE(mesh.triangles.size() == 2);
  CHECK(mesh.triangles[1] == std::array<int, 3>{0, 2, 3});
  CHECK(mesh.surface_area() == doctest::Approx(1.0));

  std::istringstream bad("v 0 0 0\nf 1 2 3\n");
  CHECK_THROWS_AS(parse_obj(bad), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_obj(empty), Error);

  std::stringstream round;
  write_obj(round, make_cygnus_like_mesh());
  const auto again = parse_obj(round);
  CHECK(again.triangles.size() == make_cygnus_like_mesh().triangles.size());
}

TEST_CASE("procedural meshes") {
  CHECK(make_box_mesh(Vec3(1, 1, 1)).surface_area() == doctest::Approx(6.0));
  const auto cyg = make_cygnus_like_mesh();
  cyg.validate();
  // Two-fold symmetry about the barrel axis maps the vertex set onto itself.
  const auto flip = Quaternion::from_axis_angle(Vec3::UnitZ(), pi);
  for (const auto& v : cyg.vertices) {
    const Vec3 r = rotate_point(flip, v);
    double best = INFINITY;
    for (const auto& w : cyg.vertices) best = std::min(best, (r - w).norm());
    REQUIRE(best < 1e-9);
  }
  CHECK(distance_to_mesh(cyg, Vec3(1.5, 0, 0)) < 1e-9);
}
