#include "orbitpose/gate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include "orbitpose/error.hpp"
#include "orbitpose/simd.hpp"

namespace orbitpose {

std::size_t mask_area(const BinaryMask& mask) {
  return static_cast<std::size_t>(std::count(mask.pixels.begin(), mask.pixels.end(), std::uint8_t{1}));
}

namespace {

double edge(const Vec2& a, const Vec2& b, double px, double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

void fill_triangle(BinaryMask& mask, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = edge(a, b, c.x(), c.y());
  if (area == 0.0) return;
  const double sign = area > 0.0 ? 1.0 : -1.0;
  // Pixel x covers [x, x+1): its center is inside when x + 0.5 lies in [lo, hi].
  const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.x(), b.x(), c.x()}) - 0.5)));
  const int x1 = std::min(mask.width - 1, static_cast<int>(std::floor(std::max({a.x(), b.x(), c.x()}) - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.y(), b.y(), c.y()}) - 0.5)));
  const int y1 = std::min(mask.height - 1, static_cast<int>(std::floor(std::max({a.y(), b.y(), c.y()}) - 0.5)));
  for (int y = y0; y <= y1; ++y) {
    const double py = y + 0.5;
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5;
      if (sign * edge(a, b, px, py) >= 0.0 && sign * edge(b, c, px, py) >= 0.0 &&
          sign * edge(c, a, px, py) >= 0.0) {
        mask.at(x, y) = 1;
      }
    }
  }
}

}  // namespace

BinaryMask rasterize_mask(const MeshModel& mesh, const Pose& pose, const CameraModel& cam, const RoI& roi) {
  BinaryMask mask(roi.crop_resolution, roi.crop_resolution, 0);
  const Mat3 r = pose.rotation.to_rotation_matrix();
  std::vector<Vec2> crop(mesh.vertices.size());
  std::vector<std::uint8_t> in_front(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3 pc = r * mesh.vertices[v] + pose.translation;
    in_front[v] = pc.z() > kMinDepth;
    if (in_front[v]) {
      const Vec2 uv(cam.focal_px * pc.x() / pc.z() + cam.principal_point.x(),
                    cam.focal_px * pc.y() / pc.z() + cam.principal_point.y());
      crop[v] = to_crop(roi, uv);
    }
  }
  for (const auto& tri : mesh.triangles) {
    if (!in_front[tri[0]] || !in_front[tri[1]] || !in_front[tri[2]]) continue;
    fill_triangle(mask, crop[tri[0]], crop[tri[1]], crop[tri[2]]);
  }
  if (mask_area(mask) == 0) {
    throw Error(ErrorCode::kEmptyMask, "target silhouette covers no crop pixels");
  }
  return mask;
}

GrayImage make_cutout(const GrayImage& image, const BinaryMask& mask) {
  if (image.width != mask.width || image.height != mask.height) {
    throw Error(ErrorCode::kDimensionMismatch, "image and mask sizes differ");
  }
  GrayImage out(image.width, image.height, 0);
  for (std::size_t k = 0; k < image.pixels.size(); ++k) {
    out.pixels[k] = mask.pixels[k] ? image.pixels[k] : std::uint8_t{0};
  }
  return out;
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

void save_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  GrayImage img(mask.width, mask.height, 0);
  for (std::size_t k = 0; k < mask.pixels.size(); ++k) img.pixels[k] = mask.pixels[k] ? 255 : 0;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_pgm(out, img);
}

double estimate_error_oracle(const KeypointPredictions& pred, std::span<const Vec2> gt_crop) {
  return keypoint_error(pred, gt_crop);
}

double estimate_error_dispersion(const KeypointPredictions& pred, const PnPResult& pnp, const KeypointSet& kps,
                                 const RoI& roi, const CameraModel& cam) {
  if (static_cast<std::size_t>(pred.n) != kps.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "predictions and keypoint set differ in size");
  }
  const auto reprojected = project_points(pnp.pose, cam, kps.points);
  std::vector<Vec2> crop(reprojected.size());
  for (std::size_t i = 0; i < crop.size(); ++i) crop[i] = to_crop(roi, reprojected[i]);
  return keypoint_error(pred, crop);
}

double OracleEstimator::estimate(const EstimatorInput& in) const {
  if (in.gt_crop.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "oracle estimator needs ground-truth keypoints");
  }
  return estimate_error_oracle(in.pred, in.gt_crop);
}

double DispersionEstimator::estimate(const EstimatorInput& in) const {
  return estimate_error_dispersion(in.pred, in.pnp, in.kps, in.roi, in.cam);
}

std::unique_ptr<ErrorEstimator> make_estimator(std::string_view name) {
  if (name == "oracle") return std::make_unique<OracleEstimator>();
  if (name == "dispersion") return std::make_unique<DispersionEstimator>();
  throw Error(ErrorCode::kInvalidArgument, "unknown error estimator '" + std::string(name) + "'");
}

GateDecision gate(double e_k_hat, double threshold) {
  if (!(threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gate threshold must be positive");
  }
  return {e_k_hat, threshold, e_k_hat <= threshold};
}

}  // namespace orbitpose
