#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "orbitpose/error.hpp"
#include "orbitpose/pnp.hpp"
#include "orbitpose/rng.hpp"
#include "orbitpose/simd.hpp"

namespace orbitpose {

std::string_view to_string(RansacFailure f) {
  switch (f) {
    case RansacFailure::kNone: return "none";
    case RansacFailure::kAllDegenerate: return "all_degenerate";
    case RansacFailure::kInsufficientInliers: return "insufficient_inliers";
  }
  return "unknown";
}

void RansacParams::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "ransac max_iterations must be >= 1");
  if (!(reproj_threshold_px > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ransac threshold must be > 0");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ransac confidence must lie in (0, 1)");
  }
  if (min_inliers != 0 && min_inliers < 4) {
    throw Error(ErrorCode::kInvalidArgument, "ransac min_inliers must be >= 4 (or 0 for automatic)");
  }
}

int RansacParams::resolved_min_inliers(int n) const {
  if (min_inliers > 0) return min_inliers;
  const int support = static_cast<int>(std::ceil(0.25 * kEstimatesPerKeypoint * n));
  return std::max(6, support);
}

std::vector<double> predictions_to_image(const KeypointPredictions& pred, const RoI& roi) {
  std::vector<double> out(pred.xy.size());
  const Vec2 tl = roi.top_left();
  simd::active_kernels().affine_points(pred.xy.data(), pred.xy.size() / 2, roi.side / roi.crop_resolution, tl.x(),
                                       tl.y(), out.data());
  return out;
}

std::size_t count_consensus(const Pose& pose, std::span<const double> image_xy, const KeypointSet& kps,
                            const CameraModel& cam, double threshold_px, std::uint8_t* mask) {
  const auto& kern = simd::active_kernels();
  const Mat3 r = pose.rotation.to_rotation_matrix();
  const double thr_sq = threshold_px * threshold_px;
  std::size_t total = 0;
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const double* block = image_xy.data() + 2 * i * kEstimatesPerKeypoint;
    std::uint8_t* block_mask = mask ? mask + i * kEstimatesPerKeypoint : nullptr;
    const Vec3 pc = r * kps.points[i] + pose.translation;
    if (!(pc.z() > kMinDepth)) {
      if (block_mask) std::fill_n(block_mask, kEstimatesPerKeypoint, std::uint8_t{0});
      continue;
    }
    const double u = cam.focal_px * pc.x() / pc.z() + cam.principal_point.x();
    const double v = cam.focal_px * pc.y() / pc.z() + cam.principal_point.y();
    total += kern.count_within(block, kEstimatesPerKeypoint, u, v, thr_sq, block_mask);
  }
  return total;
}

namespace {

int required_iterations(std::size_t inliers, std::size_t total, double confidence, int cap) {
  const double w = static_cast<double>(inliers) / static_cast<double>(total);
  const double p_good = std::pow(w, 4);
  if (p_good >= 1.0) return 1;
  if (p_good <= 0.0) return cap;
  const double k = std::log(1.0 - confidence) / std::log(1.0 - p_good);
  if (!std::isfinite(k) || k >= cap) return cap;
  return std::max(1, static_cast<int>(std::ceil(k)));
}

}  // namespace

std::optional<PnPResult> ransac_pnp(const KeypointPredictions& pred, const KeypointSet& kps, const RoI& roi,
                                    const CameraModel& cam, const RansacParams& params, RansacFailure* failure) {
  params.validate();
  const int n = pred.n;
  if (n < 4 || static_cast<std::size_t>(n) != kps.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "ransac_pnp needs n >= 4 predictions matching the keypoint set");
  }
  auto fail = [&](RansacFailure why) -> std::optional<PnPResult> {
    if (failure) *failure = why;
    return std::nullopt;
  };
  if (failure) *failure = RansacFailure::kNone;

  const std::vector<double> image_xy = predictions_to_image(pred, roi);
  const std::size_t total = image_xy.size() / 2;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::array<Correspondence, 4> sample;
  std::optional<Pose> best_pose;
  std::size_t best_count = 0;
  int needed = params.max_iterations;
  int iterations = 0;

  for (int it = 0; it < needed; ++it) {
    ++iterations;
    // Independent stream per iteration index.
    std::mt19937_64 rng(derive_seed(params.seed, static_cast<std::uint64_t>(it)));
    for (int k = 0; k < n; ++k) order[k] = k;
    for (int k = 0; k < 4; ++k) {
      std::uniform_int_distribution<int> pick(k, n - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    std::uniform_int_distribution<int> pick_estimate(0, kEstimatesPerKeypoint - 1);
    for (int k = 0; k < 4; ++k) {
      const int i = order[k];
      const std::size_t e = static_cast<std::size_t>(i) * kEstimatesPerKeypoint + pick_estimate(rng);
      sample[k] = {kps.points[i], Vec2(image_xy[2 * e], image_xy[2 * e + 1])};
    }

    Pose model;
    try {
      model = epnp_solve(sample, cam);
    } catch (const Error&) {
      continue;
    }
    const std::size_t count = count_consensus(model, image_xy, kps, cam, params.reproj_threshold_px);
    if (count > best_count) {
      best_count = count;
      best_pose = model;
      needed = std::min(params.max_iterations,
                        required_iterations(count, total, params.confidence, params.max_iterations));
    }
  }

  if (!best_pose) return fail(RansacFailure::kAllDegenerate);
  if (best_count < static_cast<std::size_t>(params.resolved_min_inliers(n))) {
    return fail(RansacFailure::kInsufficientInliers);
  }

  PnPResult result;
  result.iterations = iterations;
  result.inlier_mask.assign(total, 0);
  count_consensus(*best_pose, image_xy, kps, cam, params.reproj_threshold_px, result.inlier_mask.data());

  std::vector<Correspondence> inliers;
  inliers.reserve(best_count);
  for (std::size_t e = 0; e < total; ++e) {
    if (result.inlier_mask[e]) {
      inliers.push_back({kps.points[e / kEstimatesPerKeypoint], Vec2(image_xy[2 * e], image_xy[2 * e + 1])});
    }
  }
  result.pose = *best_pose;
  try {
    const Pose refit = epnp_solve(inliers, cam);
    if (mean_reprojection_error(refit, inliers, cam) <= mean_reprojection_error(*best_pose, inliers, cam)) {
      result.pose = refit;
    }
  } catch (const Error&) {
    // keep the best minimal-sample model
  }

  result.inlier_count =
      count_consensus(result.pose, image_xy, kps, cam, params.reproj_threshold_px, result.inlier_mask.data());
  if (result.inlier_count < static_cast<std::size_t>(params.resolved_min_inliers(n))) {
    return fail(RansacFailure::kInsufficientInliers);
  }
  inliers.clear();
  for (std::size_t e = 0; e < total; ++e) {
    if (result.inlier_mask[e]) {
      inliers.push_back({kps.points[e / kEstimatesPerKeypoint], Vec2(image_xy[2 * e], image_xy[2 * e + 1])});
    }
  }
  result.mean_reproj_error = mean_reprojection_error(result.pose, inliers, cam);
  return result;
}

}  // namespace orbitpose
