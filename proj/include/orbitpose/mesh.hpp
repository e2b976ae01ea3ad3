#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "orbitpose/geometry.hpp"

namespace orbitpose {

struct MeshModel {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  /// Throws InvalidArgument when the vertex list is empty or an index is out of range.
  void validate() const;
  double triangle_area(std::size_t t) const;
  double surface_area() const;
};

/// ASCII OBJ subset: `v x y z` and `f a b c ...` records (1-based, `a/b/c` tokens accepted,
/// negative indices unsupported). Polygons are fan-triangulated; other records are ignored.
MeshModel parse_obj(std::istream& in);
MeshModel load_obj(const std::filesystem::path& path);
void write_obj(std::ostream& out, const MeshModel& mesh);

/// Axis-aligned box centered at the origin.
MeshModel make_box_mesh(const Vec3& size);
/// Closed cylinder along +z centered at the origin.
MeshModel make_cylinder_mesh(double radius, double length, int segments);
/// Cylindrical pressurized module with two circular solar arrays on booms along +/-x.
/// Symmetric under a 180 deg rotation about the barrel (z) axis. Roughly 11 m across.
MeshModel make_cygnus_like_mesh();

/// Distance from p to the closest point on triangle t.
double point_triangle_distance(const MeshModel& mesh, std::size_t t, const Vec3& p);
double distance_to_mesh(const MeshModel& mesh, const Vec3& p);

}  // namespace orbitpose
