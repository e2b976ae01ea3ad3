#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "orbitpose/error.hpp"
#include "orbitpose/keypoints.hpp"
#include "orbitpose/metrics.hpp"
#include "orbitpose/pnp.hpp"
#include "orbitpose/roi.hpp"

using namespace orbitpose;

namespace {

Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lat(-3, 3), range(35, 75);
  return {oracle::random_unit_quaternion(rng), Vec3(lat(rng), lat(rng), range(rng))};
}

std::vector<Correspondence> make_corrs(const Pose& pose, const CameraModel& cam, const std::vector<Vec3>& pts) {
  const auto uv = oracle::project_all(pose, cam, pts);
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({pts[i], uv[i]});
  return out;
}

// Predictions with every estimate exactly on the projected keypoint.
KeypointPredictions exact_predictions(const Pose& pose, const CameraModel& cam, const KeypointSet& kps, RoI& roi) {
  const auto uv = project_points(pose, cam, kps.points);
  roi = square_and_expand(BBox::around(uv));
  KeypointPredictions pred(static_cast<int>(kps.size()));
  for (int i = 0; i < pred.n; ++i)
    for (int j = 0; j < kEstimatesPerKeypoint; ++j) pred.set(i, j, to_crop(roi, uv[i]));
  return pred;
}

}  // namespace

TEST_CASE("jacobi_eigen matches reconstruction") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int size : {3, 6, 12}) {
    Eigen::MatrixXd b(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) b(i, j) = g(rng);
    const Eigen::MatrixXd a = b.transpose() * b;
    const auto eig = jacobi_eigen(a);
    CHECK(eig.converged);
    for (int i = 1; i < size; ++i) CHECK(eig.values(i - 1) <= eig.values(i));
    const Eigen::MatrixXd rec = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((rec - a).norm() < 1e-10 * a.norm());
    CHECK((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(size, size)).norm() < 1e-12);
  }
  CHECK_THROWS_AS(jacobi_eigen(Eigen::MatrixXd(2, 3)), Error);
}

TEST_CASE("EPnP recovers exact poses from noiseless correspondences") {
  std::mt19937_64 rng(2);
  const auto cam = camera_preset("cygnus");
  const auto kps = select_keypoints(make_cygnus_like_mesh(), 11, 1);
  double worst_r = 0, worst_tn = 0;
  for (int k = 0; k < 300; ++k) {
    const Pose truth = random_pose(rng);
    const auto corrs = make_corrs(truth, cam, kps.points);
    const Pose est = epnp_solve(corrs, cam);
    const auto rep = evaluate_pose(truth, est);
    worst_r = std::max(worst_r, rep.e_r_deg());
    worst_tn = std::max(worst_tn, rep.e_tn);
    CHECK(mean_reprojection_error(est, corrs, cam) < 1e-6);
  }
  MESSAGE("worst E_R deg ", worst_r, " worst E_TN ", worst_tn);
  CHECK(worst_r <= 1e-3);
  CHECK(worst_tn <= 1e-6);
}

TEST_CASE("EPnP handles planar and minimal configurations") {
  std::mt19937_64 rng(3);
  const auto cam = camera_preset("speed");
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 50; ++k) {
    std::vector<Vec3> planar;
    for (int i = 0; i < 8; ++i) planar.emplace_back(u(rng), u(rng), 0.0);
    const Pose truth = random_pose(rng);
    const auto rep = evaluate_pose(truth, epnp_solve(make_corrs(truth, cam, planar), cam));
    CHECK(rep.e_r_deg() < 1e-3);
    CHECK(rep.e_tn < 1e-6);
  }
  // Four points: a tetrahedron.
  const std::vector<Vec3> tet = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const Pose truth{Quaternion::normalized(0.9, 0.1, -0.3, 0.2), Vec3(0.2, -0.1, 20)};
  const auto rep = evaluate_pose(truth, epnp_solve(make_corrs(truth, cam, tet), cam));
  CHECK(rep.e_r_deg() < 1e-3);
}

TEST_CASE("EPnP rejects degenerate input") {
  const auto cam = camera_preset("cygnus");
  const Pose truth{Quaternion::identity(), Vec3(0, 0, 40)};
  const std::vector<Vec3> collinear = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}};
  try {
    epnp_solve(make_corrs(truth, cam, collinear), cam);
    FAIL("expected DegenerateConfiguration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateConfiguration);
  }
  const std::vector<Vec3> three = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(epnp_solve(make_corrs(truth, cam, three), cam), Error);
}

TEST_CASE("RansacParams validation") {
  RansacParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.resolved_min_inliers(11) == 539);  // ceil(0.25 * 196 * 11)
  CHECK(p.resolved_min_inliers(1) == 49);
  p.min_inliers = 3;
  CHECK(p.resolved_min_inliers(11) == 3);
  RansacParams bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.confidence = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.reproj_threshold_px = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("RANSAC on exact predictions") {
  std::mt19937_64 rng(4);
  const auto cam = camera_preset("cygnus");
  const auto kps = select_keypoints(make_cygnus_like_mesh(), 11, 1);
  for (int k = 0; k < 30; ++k) {
    const Pose truth = random_pose(rng);
    RoI roi;
    const auto pred = exact_predictions(truth, cam, kps, roi);
    RansacParams params;
    params.seed = 9;
    RansacFailure fail = RansacFailure::kAllDegenerate;
    const auto res = ransac_pnp(pred, kps, roi, cam, params, &fail);
    REQUIRE(res.has_value());
    CHECK(fail == RansacFailure::kNone);
    CHECK(res->inlier_count == 11u * 196u);
    const auto rep = evaluate_pose(truth, res->pose);
    CHECK(rep.e_r_deg() < 1e-3);
    CHECK(rep.e_tn < 1e-6);
  }
}

TEST_CASE("RANSAC is deterministic per seed and reports insufficient support") {
  std::mt19937_64 rng(5);
  const auto cam = camera_preset("cygnus");
  const auto kps = select_keypoints(make_cygnus_like_mesh(), 11, 1);
  const Pose truth = random_pose(rng);
  RoI roi;
  auto pred = exact_predictions(truth, cam, kps, roi);
  std::normal_distribution<double> g(0, 2);
  std::uniform_real_distribution<double> u(0, 224), coin(0, 1);
  for (int i = 0; i < pred.n; ++i)
    for (int j = 0; j < kEstimatesPerKeypoint; ++j) {
      const Vec2 e = pred.estimate(i, j);
      pred.set(i, j, coin(rng) < 0.2 ? Vec2(u(rng), u(rng)) : Vec2(e.x() + g(rng), e.y() + g(rng)));
    }
  RansacParams params;
  params.seed = 42;
  const auto a = ransac_pnp(pred, kps, roi, cam, params);
  const auto b = ransac_pnp(pred, kps, roi, cam, params);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->pose.rotation == b->pose.rotation);
  CHECK(a->pose.translation == b->pose.translation);
  CHECK(a->inlier_mask == b->inlier_mask);

  // Pure noise cannot gather a quarter of the estimates.
  KeypointPredictions noise(pred.n);
  for (int i = 0; i < pred.n; ++i)
    for (int j = 0; j < kEstimatesPerKeypoint; ++j) noise.set(i, j, Vec2(u(rng), u(rng)));
  RansacFailure fail = RansacFailure::kNone;
  CHECK_FALSE(ransac_pnp(noise, kps, roi, cam, params, &fail).has_value());
  CHECK(fail == RansacFailure::kInsufficientInliers);
}

TEST_CASE("count_consensus agrees with a direct count") {
  std::mt19937_64 rng(6);
  const auto cam = camera_preset("cygnus");
  const auto kps = select_keypoints(make_cygnus_like_mesh(), 7, 2);
  const Pose pose = random_pose(rng);
  const auto uv = oracle::project_all(pose, cam, kps.points);
  std::normal_distribution<double> g(0, 6);
  std::vector<double> xy;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < kEstimatesPerKeypoint; ++j) {
      xy.push_back(uv[i].x() + g(rng));
      xy.push_back(uv[i].y() + g(rng));
    }
  std::size_t want = 0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < kEstimatesPerKeypoint; ++j) {
      const std::size_t k = 2 * (i * kEstimatesPerKeypoint + j);
      if (std::hypot(xy[k] - uv[i].x(), xy[k + 1] - uv[i].y()) < 8.0) ++want;
    }
  std::vector<std::uint8_t> mask(7 * kEstimatesPerKeypoint);
  CHECK(count_consensus(pose, xy, kps, cam, 8.0, mask.data()) == want);
  std::size_t ones = 0;
  for (auto m : mask) ones += m;
  CHECK(ones == want);
}

TEST_CASE("EPnP on random minimal sets at operating range") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  const auto cam = camera_preset("cygnus");
  int good = 0;
  const int trials = 1000;
  for (int k = 0; k < trials; ++k) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 4; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    const Pose truth = random_pose(rng);
    try {
      if (evaluate_pose(truth, epnp_solve(make_corrs(truth, cam, pts), cam)).e_r_deg() < 1e-2) ++good;
    } catch (const Error&) {
    }
  }
  MESSAGE("minimal sets solved: ", good, "/", trials);
  CHECK(good >= 995);
}
