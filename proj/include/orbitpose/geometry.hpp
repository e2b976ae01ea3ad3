#pragma once

// Conventions used throughout the library:
//   - Quaternions are scalar-first (w, x, y, z), Hamilton product.
//   - A Pose (q, t) maps target-frame points into the camera frame: p_cam = q * p * q^-1 + t.
//   - Camera frame is +z forward, +x right, +y down; pixel origin is the top-left image corner
//     and pixel (i, j) covers [i, i+1) x [j, j+1), so its center is (i + 0.5, j + 0.5).

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace orbitpose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
  /// Normalizing constructor. Throws InvalidArgument on a zero or non-finite 4-vector.
  static Quaternion normalized(double w, double x, double y, double z);
  static Quaternion from_axis_angle(const Vec3& axis, double angle_rad);
  /// Expects a proper rotation matrix; the result has w >= 0.
  static Quaternion from_rotation_matrix(const Mat3& r);

  double norm() const;
  double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  Mat3 to_rotation_matrix() const;

  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Hamilton product a ⊗ b.
Quaternion operator*(const Quaternion& a, const Quaternion& b);

/// q ⊗ p ⊗ q*. q must be unit length.
Vec3 rotate_point(const Quaternion& q, const Vec3& p);

struct Pose {
  Quaternion rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 transform(const Vec3& p) const { return rotate_point(rotation, p) + translation; }
};

struct CameraModel {
  double focal_px = 1.0;
  Vec2 principal_point = Vec2::Zero();
  int image_width = 0;
  int image_height = 0;

  Mat3 intrinsics() const;
};

/// focal = (width / 2) / tan(h_fov / 2), principal point at the image center.
CameraModel camera_from_fov(double h_fov_deg, int width, int height);

/// Named camera presets: "cygnus" (39.6 deg, 1024x1024) and "speed" (35.1 deg, 1900x1200).
CameraModel camera_preset(std::string_view name);

constexpr double kMinDepth = 1e-9;

/// Throws PointBehindCamera if any transformed point has z <= kMinDepth.
std::vector<Vec2> project_points(const Pose& pose, const CameraModel& cam, std::span<const Vec3> pts);
Vec2 project_point(const Pose& pose, const CameraModel& cam, const Vec3& pt);

}  // namespace orbitpose
