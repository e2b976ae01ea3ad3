#include "orbitpose/displacement_field.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "orbitpose/error.hpp"
#include "orbitpose/simd.hpp"

namespace orbitpose {

DisplacementField::DisplacementField(int n) : n_(n) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "displacement field needs at least one keypoint");
  }
  grid_.assign(static_cast<std::size_t>(kFieldGrid) * kFieldGrid * 2 * n, 0.0);
}

Vec2 anchor(int row, int col) {
  if (row < 0 || row >= kFieldGrid || col < 0 || col >= kFieldGrid) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "anchor cell (" + std::to_string(row) + ", " + std::to_string(col) + ") outside 14x14 grid");
  }
  return {(col + 0.5) * kFieldStride, (row + 0.5) * kFieldStride};
}

DisplacementField encode(std::span<const Vec2> gt_keypoints) {
  const int n = static_cast<int>(gt_keypoints.size());
  DisplacementField field(n);
  for (int r = 0; r < kFieldGrid; ++r) {
    for (int c = 0; c < kFieldGrid; ++c) {
      const Vec2 a = anchor(r, c);
      for (int i = 0; i < n; ++i) {
        field.at(r, c, 2 * i) = gt_keypoints[i].x() - a.x();
        field.at(r, c, 2 * i + 1) = gt_keypoints[i].y() - a.y();
      }
    }
  }
  return field;
}

KeypointPredictions decode(const DisplacementField& field) {
  const int n = field.keypoints();
  KeypointPredictions pred(n);
  for (int r = 0; r < kFieldGrid; ++r) {
    for (int c = 0; c < kFieldGrid; ++c) {
      const Vec2 a = anchor(r, c);
      const int j = r * kFieldGrid + c;
      for (int i = 0; i < n; ++i) {
        pred.set(i, j, Vec2(a.x() + field.at(r, c, 2 * i), a.y() + field.at(r, c, 2 * i + 1)));
      }
    }
  }
  return pred;
}

DisplacementField field_from_predictions(const KeypointPredictions& pred) {
  DisplacementField field(pred.n);
  for (int r = 0; r < kFieldGrid; ++r) {
    for (int c = 0; c < kFieldGrid; ++c) {
      const Vec2 a = anchor(r, c);
      const int j = r * kFieldGrid + c;
      for (int i = 0; i < pred.n; ++i) {
        const Vec2 p = pred.estimate(i, j);
        field.at(r, c, 2 * i) = p.x() - a.x();
        field.at(r, c, 2 * i + 1) = p.y() - a.y();
      }
    }
  }
  return field;
}

double keypoint_error(const KeypointPredictions& pred, std::span<const Vec2> gt) {
  if (static_cast<std::size_t>(pred.n) != gt.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "predictions cover " + std::to_string(pred.n) +
                                                   " keypoints but ground truth has " + std::to_string(gt.size()));
  }
  if (pred.n == 0) return 0.0;
  const auto& k = simd::active_kernels();
  double total = 0.0;
  for (int i = 0; i < pred.n; ++i) {
    total += k.sum_distances(pred.keypoint_data(i), kEstimatesPerKeypoint, gt[i].x(), gt[i].y());
  }
  return total / (static_cast<double>(kEstimatesPerKeypoint) * pred.n);
}

namespace {

constexpr std::array<char, 4> kMagic{'D', 'F', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "field IO assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(ErrorCode::kParseError, "truncated displacement field header");
  }
  return v;
}

}  // namespace

void write_field(std::ostream& out, const DisplacementField& field) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(field.keypoints()));
  put_u32(out, static_cast<std::uint32_t>(kFieldGrid));
  const auto data = field.data();
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
  if (!out) {
    throw Error(ErrorCode::kIoError, "failed to write displacement field");
  }
}

DisplacementField read_field(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorCode::kParseError, "not a displacement field stream (bad magic)");
  }
  if (const auto version = get_u32(in); version != kVersion) {
    throw Error(ErrorCode::kParseError, "unsupported displacement field version " + std::to_string(version));
  }
  const auto n = get_u32(in);
  const auto grid = get_u32(in);
  if (grid != kFieldGrid || n == 0 || n > 100000) {
    throw Error(ErrorCode::kParseError, "bad displacement field header (n=" + std::to_string(n) +
                                            ", grid=" + std::to_string(grid) + ")");
  }
  DisplacementField field(static_cast<int>(n));
  auto data = field.data();
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()))) {
    throw Error(ErrorCode::kParseError, "truncated displacement field payload");
  }
  return field;
}

void save_field(const std::filesystem::path& path, const DisplacementField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_field(out, field);
}

DisplacementField load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_field(in);
}

}  // namespace orbitpose
