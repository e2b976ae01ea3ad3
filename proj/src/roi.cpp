#include "orbitpose/roi.hpp"

#include <algorithm>

#include "orbitpose/error.hpp"

namespace orbitpose {

BBox BBox::around(std::span<const Vec2> pts) {
  if (pts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot bound an empty point set");
  }
  BBox b{pts[0].x(), pts[0].y(), pts[0].x(), pts[0].y()};
  for (const auto& p : pts) {
    b.x_min = std::min(b.x_min, p.x());
    b.y_min = std::min(b.y_min, p.y());
    b.x_max = std::max(b.x_max, p.x());
    b.y_max = std::max(b.y_max, p.y());
  }
  if (!b.valid()) {
    throw Error(ErrorCode::kInvalidArgument, "point set spans zero width or height");
  }
  return b;
}

RoI square_and_expand(const BBox& b, double expansion, int crop_resolution) {
  if (!b.valid()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid bounding box");
  }
  if (!(expansion > 0.0) || crop_resolution <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "expansion and crop resolution must be positive");
  }
  return RoI{b.center(), std::max(b.width(), b.height()) * expansion, crop_resolution};
}

Vec2 to_crop(const RoI& roi, const Vec2& p) { return (p - roi.top_left()) * roi.scale(); }

Vec2 from_crop(const RoI& roi, const Vec2& p) { return p * (roi.side / roi.crop_resolution) + roi.top_left(); }

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

bool roi_contains(const RoI& roi, const BBox& gt) {
  const Vec2 tl = roi.top_left();
  const double x1 = tl.x() + roi.side;
  const double y1 = tl.y() + roi.side;
  return gt.x_min >= tl.x() && gt.y_min >= tl.y() && gt.x_max <= x1 && gt.y_max <= y1;
}

}  // namespace orbitpose
