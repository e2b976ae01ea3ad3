#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "orbitpose/displacement_field.hpp"
#include "orbitpose/geometry.hpp"
#include "orbitpose/keypoints.hpp"
#include "orbitpose/roi.hpp"

namespace orbitpose {

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending; eigenvectors are the matching columns.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int sweeps = 0;
  bool converged = false;
};

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tolerance = 1e-12, int max_sweeps = 100);

struct Correspondence {
  Vec3 point3d;  // target frame, meters
  Vec2 point2d;  // full-image pixels
};

struct EpnpOptions {
  int gauss_newton_steps = 10;
  /// Clouds whose smallest principal variance is below this fraction of the largest use three
  /// control points.
  double planar_ratio = 1e-12;
};

/// EPnP with N = 1, 2, 3 null-space hypotheses (N = 1, 2 for planar clouds), Gauss-Newton beta
/// refinement, and Procrustes pose extraction; returns the hypothesis with the lowest mean
/// reprojection error. With 4 or 5 points every null-space direction is tried as the lead of the
/// linearization. Throws DegenerateConfiguration or SolutionBehindCamera.
Pose epnp_solve(std::span<const Correspondence> corrs, const CameraModel& cam, const EpnpOptions& opts = {});

double mean_reprojection_error(const Pose& pose, std::span<const Correspondence> corrs, const CameraModel& cam);

struct RansacParams {
  int max_iterations = 300;
  double reproj_threshold_px = 8.0;
  double confidence = 0.99;
  /// Minimum supporting estimates; 0 selects max(6, ceil(0.25 · 196 · n)).
  int min_inliers = 0;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
  int resolved_min_inliers(int n) const;
};

struct PnPResult {
  Pose pose;
  /// One flag per estimate, keypoint-major (same order as KeypointPredictions).
  std::vector<std::uint8_t> inlier_mask;
  std::size_t inlier_count = 0;
  double mean_reproj_error = 0.0;  // full-image pixels, inliers only
  int iterations = 0;
};

enum class RansacFailure { kNone, kAllDegenerate, kInsufficientInliers };
std::string_view to_string(RansacFailure f);

/// Crop-frame predictions mapped to full-image pixels (interleaved, keypoint-major).
std::vector<double> predictions_to_image(const KeypointPredictions& pred, const RoI& roi);

/// Number of estimates within `threshold_px` of their keypoint's projection under `pose`.
/// Keypoints behind the camera contribute nothing. `mask` (optional) receives per-estimate flags.
std::size_t count_consensus(const Pose& pose, std::span<const double> image_xy, const KeypointSet& kps,
                            const CameraModel& cam, double threshold_px, std::uint8_t* mask = nullptr);

/// RANSAC over single estimates: each minimal sample takes 4 distinct keypoints and one of the 196
/// estimates of each. Deterministic per seed. Returns nullopt (a non-detection) on failure.
std::optional<PnPResult> ransac_pnp(const KeypointPredictions& pred, const KeypointSet& kps, const RoI& roi,
                                    const CameraModel& cam, const RansacParams& params,
                                    RansacFailure* failure = nullptr);

}  // namespace orbitpose
