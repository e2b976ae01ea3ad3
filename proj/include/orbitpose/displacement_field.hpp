#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "orbitpose/geometry.hpp"

namespace orbitpose {

constexpr int kFieldGrid = 14;
constexpr int kFieldStride = 16;  // 224 / 14
constexpr int kEstimatesPerKeypoint = kFieldGrid * kFieldGrid;

/// 14×14×2n regression output in crop-frame pixels; cell (r, c) stores the offset from its anchor
/// to every keypoint, laid out [r][c][2i + {0: x, 1: y}].
class DisplacementField {
 public:
  explicit DisplacementField(int n);

  int keypoints() const { return n_; }
  double& at(int row, int col, int channel) { return grid_[index(row, col, channel)]; }
  double at(int row, int col, int channel) const { return grid_[index(row, col, channel)]; }
  std::span<double> data() { return grid_; }
  std::span<const double> data() const { return grid_; }

 private:
  std::size_t index(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * kFieldGrid + col) * (2 * n_) + channel;
  }

  int n_;
  std::vector<double> grid_;
};

/// n × 196 keypoint estimates, keypoint-major with interleaved xy, so estimate j of keypoint i
/// sits at xy[2 (196 i + j)]. Estimate j comes from cell (j / 14, j % 14).
struct KeypointPredictions {
  int n = 0;
  std::vector<double> xy;

  KeypointPredictions() = default;
  explicit KeypointPredictions(int keypoints)
      : n(keypoints), xy(static_cast<std::size_t>(keypoints) * kEstimatesPerKeypoint * 2, 0.0) {}

  Vec2 estimate(int i, int j) const {
    const std::size_t k = 2 * (static_cast<std::size_t>(i) * kEstimatesPerKeypoint + j);
    return {xy[k], xy[k + 1]};
  }
  void set(int i, int j, const Vec2& p) {
    const std::size_t k = 2 * (static_cast<std::size_t>(i) * kEstimatesPerKeypoint + j);
    xy[k] = p.x();
    xy[k + 1] = p.y();
  }
  const double* keypoint_data(int i) const { return xy.data() + 2 * static_cast<std::size_t>(i) * kEstimatesPerKeypoint; }
};

/// Cell-center anchor in the 224×224 crop frame. Throws IndexOutOfRange outside [0, 14).
Vec2 anchor(int row, int col);

DisplacementField encode(std::span<const Vec2> gt_keypoints);
KeypointPredictions decode(const DisplacementField& field);
/// Inverse of decode: the field whose decoding reproduces `pred` (up to rounding).
DisplacementField field_from_predictions(const KeypointPredictions& pred);

/// Mean Euclidean distance between every estimate and its keypoint's ground truth (crop pixels).
double keypoint_error(const KeypointPredictions& pred, std::span<const Vec2> gt);

/// Binary replay format: "DFLD", u32 version (1), u32 n, u32 grid (14), then 14·14·2n
/// little-endian float64 values in [r][c][channel] order.
void write_field(std::ostream& out, const DisplacementField& field);
DisplacementField read_field(std::istream& in);
void save_field(const std::filesystem::path& path, const DisplacementField& field);
DisplacementField load_field(const std::filesystem::path& path);

}  // namespace orbitpose
