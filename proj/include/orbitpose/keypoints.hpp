#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "orbitpose/mesh.hpp"

namespace orbitpose {

/// n distinct 3-D surface points in the target frame (meters).
struct KeypointSet {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  /// Throws InvalidArgument if any two points coincide.
  void validate() const;
};

struct SelectionOptions {
  double oversample_factor = 5.0;
};

/// Poisson-disk surface keypoints by weighted sample elimination over an area-uniform candidate pool.
/// Deterministic for a fixed (mesh, n, seed, options).
KeypointSet select_keypoints(const MeshModel& mesh, int n, std::uint64_t seed, const SelectionOptions& opts = {});

/// Maximum Poisson-disk radius for n samples covering a surface of the given area.
double poisson_radius_bound(double area, int n);

/// Draws `count` points uniformly by surface area.
std::vector<Vec3> sample_surface(const MeshModel& mesh, std::size_t count, std::uint64_t seed);

/// Greedy sample elimination: indices (into `candidates`) of the `keep` survivors, in candidate order.
std::vector<std::size_t> eliminate_samples(const std::vector<Vec3>& candidates, std::size_t keep, double r_max);

/// Plain-text table, one "x y z" row per point. '#' starts a comment.
KeypointSet parse_keypoint_table(std::istream& in);
KeypointSet load_keypoint_table(const std::filesystem::path& path);
void write_keypoint_table(std::ostream& out, const KeypointSet& kps);

constexpr std::size_t kSpeedKeypointCount = 11;

/// Loads an 11-point SPEED-style keypoint set; MissingConfig on a missing file or wrong row count.
KeypointSet speed_keypoints(const std::filesystem::path& config_path);

}  // namespace orbitpose
