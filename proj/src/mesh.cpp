#include "orbitpose/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "orbitpose/error.hpp"

namespace orbitpose {

void MeshModel::validate() const {
  if (vertices.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mesh has no vertices");
  }
  const int nv = static_cast<int>(vertices.size());
  for (const auto& tri : triangles) {
    for (int idx : tri) {
      if (idx < 0 || idx >= nv) {
        throw Error(ErrorCode::kInvalidArgument,
                    "triangle index " + std::to_string(idx) + " out of range [0, " + std::to_string(nv) + ")");
      }
    }
  }
}

double MeshModel::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec3& a = vertices[tri[0]];
  return 0.5 * (vertices[tri[1]] - a).cross(vertices[tri[2]] - a).norm();
}

double MeshModel::surface_area() const {
  double area = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) area += triangle_area(t);
  return area;
}

MeshModel parse_obj(std::istream& in) {
  MeshModel mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw Error(ErrorCode::kParseError, "bad vertex record on line " + std::to_string(line_no));
      }
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        int idx = 0;
        try {
          idx = std::stoi(tok.substr(0, slash));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kParseError, "bad face index '" + tok + "' on line " + std::to_string(line_no));
        }
        if (idx < 1) {
          throw Error(ErrorCode::kParseError, "face indices must be 1-based and positive (line " +
                                                  std::to_string(line_no) + ")");
        }
        poly.push_back(idx - 1);
      }
      if (poly.size() < 3) {
        throw Error(ErrorCode::kParseError, "face with fewer than 3 vertices on line " + std::to_string(line_no));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  mesh.validate();
  return mesh;
}

MeshModel load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open mesh file " + path.string());
  }
  return parse_obj(in);
}

void write_obj(std::ostream& out, const MeshModel& mesh) {
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

namespace {

void append(MeshModel& dst, const MeshModel& src, const Vec3& offset) {
  const int base = static_cast<int>(dst.vertices.size());
  for (const auto& v : src.vertices) dst.vertices.push_back(v + offset);
  for (const auto& t : src.triangles) dst.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

// Flat regular polygon in the z = 0 plane, fan-triangulated around its center.
MeshModel make_disk(double radius, int segments) {
  MeshModel disk;
  disk.vertices.emplace_back(0.0, 0.0, 0.0);
  for (int k = 0; k < segments; ++k) {
    const double a = 2.0 * std::numbers::pi * k / segments;
    disk.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
  }
  for (int k = 0; k < segments; ++k) {
    disk.triangles.push_back({0, 1 + k, 1 + (k + 1) % segments});
  }
  return disk;
}

}  // namespace

MeshModel make_box_mesh(const Vec3& size) {
  const Vec3 h = size / 2.0;
  MeshModel m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  // Outward-facing quads, two triangles each.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  return m;
}

MeshModel make_cylinder_mesh(double radius, double length, int segments) {
  if (segments < 3 || !(radius > 0.0) || !(length > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cylinder needs radius > 0, length > 0 and >= 3 segments");
  }
  MeshModel m;
  const double hz = length / 2.0;
  for (int ring = 0; ring < 2; ++ring) {
    const double z = ring == 0 ? -hz : hz;
    for (int k = 0; k < segments; ++k) {
      const double a = 2.0 * std::numbers::pi * k / segments;
      m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  const int bottom_center = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0, 0.0, -hz);
  const int top_center = bottom_center + 1;
  m.vertices.emplace_back(0.0, 0.0, hz);
  for (int k = 0; k < segments; ++k) {
    const int k1 = (k + 1) % segments;
    m.triangles.push_back({k, k1, segments + k1});
    m.triangles.push_back({k, segments + k1, segments + k});
    m.triangles.push_back({bottom_center, k1, k});
    m.triangles.push_back({top_center, segments + k, segments + k1});
  }
  return m;
}

MeshModel make_cygnus_like_mesh() {
  constexpr double kBarrelRadius = 1.5;
  constexpr double kBarrelLength = 6.4;
  constexpr double kBoomLength = 1.2;
  constexpr double kArrayRadius = 2.1;
  constexpr double kArrayZ = -2.4;

  MeshModel m = make_cylinder_mesh(kBarrelRadius, kBarrelLength, 24);
  const double boom_center = kBarrelRadius + kBoomLength / 2.0;
  const double array_center = kBarrelRadius + kBoomLength + kArrayRadius;
  for (double side : {-1.0, 1.0}) {
    append(m, make_box_mesh(Vec3(kBoomLength, 0.2, 0.2)), Vec3(side * boom_center, 0.0, kArrayZ));
    append(m, make_disk(kArrayRadius, 16), Vec3(side * array_center, 0.0, kArrayZ));
  }
  return m;
}

double point_triangle_distance(const MeshModel& mesh, std::size_t t, const Vec3& p) {
  // Closest point on triangle via Voronoi-region classification.
  const auto& tri = mesh.triangles[t];
  const Vec3& a = mesh.vertices[tri[0]];
  const Vec3& b = mesh.vertices[tri[1]];
  const Vec3& c = mesh.vertices[tri[2]];
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

double distance_to_mesh(const MeshModel& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    best = std::min(best, point_triangle_distance(mesh, t, p));
  }
  return best;
}

}  // namespace orbitpose
