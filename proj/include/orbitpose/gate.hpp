#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "orbitpose/displacement_field.hpp"
#include "orbitpose/keypoints.hpp"
#include "orbitpose/mesh.hpp"
#include "orbitpose/pnp.hpp"
#include "orbitpose/roi.hpp"

namespace orbitpose {

constexpr double kDefaultGateThreshold = 20.0;

/// Row-major single-channel raster.
template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> pixels;

  Raster() = default;
  Raster(int w, int h, T fill = T{}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  T at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

using BinaryMask = Raster<std::uint8_t>;  // 0 or 1
using GrayImage = Raster<std::uint8_t>;

std::size_t mask_area(const BinaryMask& mask);

/// Silhouette of `mesh` under `pose` in the RoI crop. A pixel is set when its center lies in any
/// projected triangle; triangles with a vertex behind the camera are skipped. Throws EmptyMask.
BinaryMask rasterize_mask(const MeshModel& mesh, const Pose& pose, const CameraModel& cam, const RoI& roi);

/// Keeps image pixels under the mask and zeroes the rest. Throws DimensionMismatch.
GrayImage make_cutout(const GrayImage& image, const BinaryMask& mask);

/// Binary PGM (P5); mask pixels are written as 0 / 255.
void write_pgm(std::ostream& out, const GrayImage& image);
void save_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask);

/// True keypoint error against ground-truth crop-frame keypoints.
double estimate_error_oracle(const KeypointPredictions& pred, std::span<const Vec2> gt_crop);

/// Label-free proxy: mean crop-frame distance from each estimate to its keypoint reprojected under
/// the solved pose.
double estimate_error_dispersion(const KeypointPredictions& pred, const PnPResult& pnp, const KeypointSet& kps,
                                 const RoI& roi, const CameraModel& cam);

struct EstimatorInput {
  const KeypointPredictions& pred;
  const PnPResult& pnp;
  const KeypointSet& kps;
  const RoI& roi;
  const CameraModel& cam;
  std::span<const Vec2> gt_crop;  // empty when labels are unavailable
};

class ErrorEstimator {
 public:
  virtual ~ErrorEstimator() = default;
  virtual std::string_view name() const = 0;
  virtual double estimate(const EstimatorInput& in) const = 0;
};

class OracleEstimator final : public ErrorEstimator {
 public:
  std::string_view name() const override { return "oracle"; }
  double estimate(const EstimatorInput& in) const override;
};

class DispersionEstimator final : public ErrorEstimator {
 public:
  std::string_view name() const override { return "dispersion"; }
  double estimate(const EstimatorInput& in) const override;
};

/// "oracle" or "dispersion"; throws InvalidArgument otherwise.
std::unique_ptr<ErrorEstimator> make_estimator(std::string_view name);

struct GateDecision {
  double e_k_hat = 0.0;
  double threshold = kDefaultGateThreshold;
  bool accepted = true;
};

/// Accepts when e_k_hat <= threshold.
GateDecision gate(double e_k_hat, double threshold = kDefaultGateThreshold);

}  // namespace orbitpose
