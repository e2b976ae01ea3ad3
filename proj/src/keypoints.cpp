#include "orbitpose/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "orbitpose/error.hpp"

namespace orbitpose {

void KeypointSet::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if ((points[i] - points[j]).norm() == 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "keypoints " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

double poisson_radius_bound(double area, int n) {
  if (n < 1 || !(area > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "Poisson radius needs a positive area and n >= 1");
  }
  return std::sqrt(area / (2.0 * std::sqrt(3.0) * n));
}

std::vector<Vec3> sample_surface(const MeshModel& mesh, std::size_t count, std::uint64_t seed) {
  std::vector<double> areas(mesh.triangles.size());
  for (std::size_t t = 0; t < areas.size(); ++t) areas[t] = mesh.triangle_area(t);
  std::discrete_distribution<std::size_t> pick_triangle(areas.begin(), areas.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::mt19937_64 rng(seed);

  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& tri = mesh.triangles[pick_triangle(rng)];
    double u = unit(rng), v = unit(rng);
    if (u + v > 1.0) u = 1.0 - u, v = 1.0 - v;
    const Vec3& a = mesh.vertices[tri[0]];
    out.push_back(a + u * (mesh.vertices[tri[1]] - a) + v * (mesh.vertices[tri[2]] - a));
  }
  return out;
}

std::vector<std::size_t> eliminate_samples(const std::vector<Vec3>& candidates, std::size_t keep, double r_max) {
  const std::size_t m = candidates.size();
  if (keep >= m) {
    std::vector<std::size_t> all(m);
    for (std::size_t i = 0; i < m; ++i) all[i] = i;
    return all;
  }
  const double d_max = 2.0 * r_max;
  auto weight = [d_max](double d) { return std::pow(1.0 - std::min(d, d_max) / d_max, 8); };

  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors(m);
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = (candidates[i] - candidates[j]).norm();
      if (d < d_max) {
        const double wij = weight(d);
        neighbors[i].emplace_back(j, wij);
        neighbors[j].emplace_back(i, wij);
        w[i] += wij;
        w[j] += wij;
      }
    }
  }

  // Ordered by (weight desc, index asc); the first element is the next to go.
  auto cmp = [](const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::set<std::pair<double, std::size_t>, decltype(cmp)> queue(cmp);
  for (std::size_t i = 0; i < m; ++i) queue.emplace(w[i], i);

  std::vector<bool> alive(m, true);
  std::size_t remaining = m;
  while (remaining > keep) {
    const auto [wi, i] = *queue.begin();
    queue.erase(queue.begin());
    alive[i] = false;
    --remaining;
    for (const auto& [j, wij] : neighbors[i]) {
      if (!alive[j]) continue;
      queue.erase({w[j], j});
      w[j] -= wij;
      queue.emplace(w[j], j);
    }
  }

  std::vector<std::size_t> kept;
  kept.reserve(keep);
  for (std::size_t i = 0; i < m; ++i) {
    if (alive[i]) kept.push_back(i);
  }
  return kept;
}

KeypointSet select_keypoints(const MeshModel& mesh, int n, std::uint64_t seed, const SelectionOptions& opts) {
  mesh.validate();
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "keypoint count must be positive");
  }
  if (!(opts.oversample_factor >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "oversample_factor must be >= 1");
  }
  std::vector<Vec3> distinct = mesh.vertices;
  std::sort(distinct.begin(), distinct.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const double area = mesh.surface_area();
  if (static_cast<int>(distinct.size()) < n || !(area > 0.0)) {
    throw Error(ErrorCode::kInsufficientGeometry,
                "mesh with " + std::to_string(distinct.size()) + " distinct vertices and area " +
                    std::to_string(area) + " cannot yield " + std::to_string(n) + " keypoints");
  }

  const auto pool = static_cast<std::size_t>(std::ceil(n * opts.oversample_factor));
  const std::vector<Vec3> candidates = sample_surface(mesh, pool, seed);
  const auto kept = eliminate_samples(candidates, static_cast<std::size_t>(n), poisson_radius_bound(area, n));

  KeypointSet out;
  for (std::size_t idx : kept) out.points.push_back(candidates[idx]);
  try {
    out.validate();
  } catch (const Error&) {
    throw Error(ErrorCode::kInsufficientGeometry, "surface sampling produced coincident keypoints");
  }
  return out;
}

KeypointSet parse_keypoint_table(std::istream& in) {
  KeypointSet kps;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) continue;
    std::string rest;
    if (!(ls >> y >> z) || (ls >> rest)) {
      throw Error(ErrorCode::kParseError, "expected 'x y z' on line " + std::to_string(line_no));
    }
    kps.points.emplace_back(x, y, z);
  }
  kps.validate();
  return kps;
}

KeypointSet load_keypoint_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open keypoint table " + path.string());
  }
  return parse_keypoint_table(in);
}

void write_keypoint_table(std::ostream& out, const KeypointSet& kps) {
  out.precision(17);
  for (const auto& p : kps.points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

KeypointSet speed_keypoints(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    throw Error(ErrorCode::kMissingConfig, "SPEED keypoint configuration not found at " + config_path.string());
  }
  KeypointSet kps = parse_keypoint_table(in);
  if (kps.size() != kSpeedKeypointCount) {
    throw Error(ErrorCode::kMissingConfig, "SPEED keypoint configuration must list 11 points, found " +
                                                std::to_string(kps.size()));
  }
  return kps;
}

}  // namespace orbitpose
