#pragma once

#include <span>

#include "orbitpose/geometry.hpp"

namespace orbitpose {

constexpr int kCropResolution = 224;
constexpr double kRoiExpansion = 1.25;

/// Axis-aligned box in full-image pixels.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  /// Tight box around the points. Throws InvalidArgument on an empty or degenerate set.
  static BBox around(std::span<const Vec2> pts);
};

/// Square crop window; may extend beyond the image (the outside counts as black).
struct RoI {
  Vec2 center = Vec2::Zero();
  double side = 1.0;
  int crop_resolution = kCropResolution;

  Vec2 top_left() const { return center - Vec2::Constant(side / 2.0); }
  double scale() const { return crop_resolution / side; }
};

/// Square the box on its longer side, then scale about its center.
RoI square_and_expand(const BBox& b, double expansion = kRoiExpansion, int crop_resolution = kCropResolution);

Vec2 to_crop(const RoI& roi, const Vec2& p);
Vec2 from_crop(const RoI& roi, const Vec2& p);

double iou(const BBox& a, const BBox& b);

/// Closed containment: a ground-truth corner on the RoI edge counts as inside.
bool roi_contains(const RoI& roi, const BBox& gt);

}  // namespace orbitpose
