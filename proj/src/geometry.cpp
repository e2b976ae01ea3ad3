#include "orbitpose/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "orbitpose/error.hpp"

namespace orbitpose {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPointBehindCamera: return "PointBehindCamera";
    case ErrorCode::kInvalidFov: return "InvalidFov";
    case ErrorCode::kInsufficientGeometry: return "InsufficientGeometry";
    case ErrorCode::kMissingConfig: return "MissingConfig";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kSolutionBehindCamera: return "SolutionBehindCamera";
    case ErrorCode::kZeroGroundTruthRange: return "ZeroGroundTruthRange";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Quaternion Quaternion::normalized(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kInvalidArgument, "cannot normalize a zero or non-finite quaternion");
  }
  return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
  const double n = axis.norm();
  if (!(n > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rotation axis has zero length");
  }
  const Vec3 a = axis / n;
  const double s = std::sin(angle_rad / 2.0);
  return normalized(std::cos(angle_rad / 2.0), a.x() * s, a.y() * s, a.z() * s);
}

Quaternion Quaternion::from_rotation_matrix(const Mat3& r) {
  // Shepperd: branch on the largest of (trace, diagonal) for numerical stability.
  const double tr = r.trace();
  double w, x, y, z;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    w = 0.25 * s;
    x = (r(2, 1) - r(1, 2)) / s;
    y = (r(0, 2) - r(2, 0)) / s;
    z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    w = (r(2, 1) - r(1, 2)) / s;
    x = 0.25 * s;
    y = (r(0, 1) + r(1, 0)) / s;
    z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 - r(0, 0) + r(1, 1) - r(2, 2));
    w = (r(0, 2) - r(2, 0)) / s;
    x = (r(0, 1) + r(1, 0)) / s;
    y = 0.25 * s;
    z = (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 - r(0, 0) - r(1, 1) + r(2, 2));
    w = (r(1, 0) - r(0, 1)) / s;
    x = (r(0, 2) + r(2, 0)) / s;
    y = (r(1, 2) + r(2, 1)) / s;
    z = 0.25 * s;
  }
  if (w < 0.0) {
    w = -w, x = -x, y = -y, z = -z;
  }
  return normalized(w, x, y, z);
}

double Quaternion::norm() const { return std::sqrt(dot(*this)); }

Mat3 Quaternion::to_rotation_matrix() const {
  Mat3 r;
  const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
  const double xy = x * y, xz = x * z, yz = y * z, wx = w * x, wy = w * y, wz = w * z;
  r << ww + xx - yy - zz, 2 * (xy - wz), 2 * (xz + wy),
       2 * (xy + wz), ww - xx + yy - zz, 2 * (yz - wx),
       2 * (xz - wy), 2 * (yz + wx), ww - xx - yy + zz;
  return r;
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Vec3 rotate_point(const Quaternion& q, const Vec3& p) {
  // t = 2 (u x p); p' = p + w t + u x t
  const Vec3 u(q.x, q.y, q.z);
  const Vec3 t = 2.0 * u.cross(p);
  return p + q.w * t + u.cross(t);
}

Mat3 CameraModel::intrinsics() const {
  Mat3 k;
  k << focal_px, 0.0, principal_point.x(), 0.0, focal_px, principal_point.y(), 0.0, 0.0, 1.0;
  return k;
}

CameraModel camera_from_fov(double h_fov_deg, int width, int height) {
  if (!(h_fov_deg > 0.0 && h_fov_deg < 180.0)) {
    throw Error(ErrorCode::kInvalidFov, "horizontal fov must lie in (0, 180) degrees, got " +
                                            std::to_string(h_fov_deg));
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  CameraModel cam;
  const double half = h_fov_deg * std::numbers::pi / 360.0;
  cam.focal_px = (width / 2.0) / std::tan(half);
  cam.principal_point = Vec2(width / 2.0, height / 2.0);
  cam.image_width = width;
  cam.image_height = height;
  return cam;
}

CameraModel camera_preset(std::string_view name) {
  if (name == "cygnus") return camera_from_fov(39.6, 1024, 1024);
  if (name == "speed") return camera_from_fov(35.1, 1900, 1200);
  throw Error(ErrorCode::kInvalidArgument, "unknown camera preset '" + std::string(name) + "'");
}

Vec2 project_point(const Pose& pose, const CameraModel& cam, const Vec3& pt) {
  const Vec3 pc = pose.transform(pt);
  if (!(pc.z() > kMinDepth)) {
    throw Error(ErrorCode::kPointBehindCamera, "point has camera depth " + std::to_string(pc.z()));
  }
  return {cam.focal_px * pc.x() / pc.z() + cam.principal_point.x(),
          cam.focal_px * pc.y() / pc.z() + cam.principal_point.y()};
}

std::vector<Vec2> project_points(const Pose& pose, const CameraModel& cam, std::span<const Vec3> pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(project_point(pose, cam, p));
  return out;
}

}  // namespace orbitpose
