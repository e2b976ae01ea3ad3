#include "orbitpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "json.hpp"

#include "orbitpose/error.hpp"
#include "orbitpose/rng.hpp"

namespace orbitpose {

namespace {
constexpr std::uint64_t kScenarioSalt = 0x5ce7a210;
constexpr std::uint64_t kSplitSalt = 0x5b117;
constexpr int kLateralAttempts = 64;

bool in_unit(double f) { return f >= 0.0 && f <= 1.0; }
}  // namespace

void NoiseModel::validate() const {
  if (!(gaussian_sigma_px >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "gaussian_sigma_px must be >= 0");
  if (!in_unit(outlier_fraction) || !in_unit(cluster_flip_fraction) || !in_unit(pure_outlier_fraction)) {
    throw Error(ErrorCode::kInvalidArgument, "noise fractions must lie in [0, 1]");
  }
}

NoiseModel noise_preset(std::string_view name) {
  if (name == "clean") return {};
  if (name == "nominal") return {1.0, 0.05, 0.0, 0.0};
  if (name == "glare") return {2.0, 0.20, 0.0, 0.0};
  if (name == "blur") return {3.0, 0.10, 0.0, 0.0};
  if (name == "calibrated") return {2.0, 0.20, 0.05, 0.0};
  if (name == "pure_outlier") return {0.0, 1.0, 0.0, 1.0};
  throw Error(ErrorCode::kInvalidArgument, "unknown noise preset '" + std::string(name) + "'");
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw Error(ErrorCode::kParseError, "unknown split '" + std::string(s) + "'");
}

std::vector<ScenarioCategory> standard_composition(double scale) {
  // Image effects map to noise presets; background variants share the nominal preset.
  std::vector<ScenarioCategory> c = {
      {"No augmentations", 3000, "nominal", false},
      {"Glare and lens flares", 3000, "glare", false},
      {"Blur", 3000, "blur", false},
      {"Spacecraft partially out-of-frame", 3000, "nominal", true},
      {"No augmentations, real Earth background", 2000, "nominal", false},
      {"Glare and lens flares, real Earth background", 2000, "glare", false},
      {"Blur, real Earth background", 2000, "blur", false},
      {"No augmentations, randomized background", 2000, "nominal", false},
  };
  for (auto& cat : c) cat.count = static_cast<int>(std::lround(cat.count * scale));
  return c;
}

void ScenarioConfig::validate() const {
  camera();
  if (!(distance_min > 0.0 && distance_min <= distance_max)) {
    throw Error(ErrorCode::kInvalidArgument, "distance range must be positive and ordered");
  }
  if (composition.empty() && n_images < 1) throw Error(ErrorCode::kInvalidArgument, "n_images must be >= 1");
  corruption.validate();
  split.validate();
  if (!in_unit(out_of_frame_fraction)) throw Error(ErrorCode::kInvalidArgument, "out_of_frame_fraction must lie in [0, 1]");
  for (const auto& cat : composition) {
    noise_preset(cat.noise_preset);
    if (cat.count < 0) throw Error(ErrorCode::kInvalidArgument, "category counts must be non-negative");
  }
}

int ScenarioConfig::total_images() const {
  if (composition.empty()) return n_images;
  int total = 0;
  for (const auto& cat : composition) total += cat.count;
  return total;
}

Quaternion random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const double w = g(rng), x = g(rng), y = g(rng), z = g(rng);
    if (w * w + x * x + y * y + z * z > 1e-12) return Quaternion::normalized(w, x, y, z);
  }
}

namespace {

struct Placement {
  BBox bbox;
  bool ok = false;
};

Placement place(const std::vector<Vec3>& rotated, const Vec3& t, const CameraModel& cam) {
  Placement p;
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto& v : rotated) {
    const Vec3 pc = v + t;
    if (!(pc.z() > kMinDepth)) return p;
    const double u = cam.focal_px * pc.x() / pc.z() + cam.principal_point.x();
    const double w = cam.focal_px * pc.y() / pc.z() + cam.principal_point.y();
    x0 = std::min(x0, u), x1 = std::max(x1, u), y0 = std::min(y0, w), y1 = std::max(y1, w);
  }
  p.bbox = {x0, y0, x1, y1};
  p.ok = p.bbox.valid();
  return p;
}

bool inside_image(const BBox& b, const CameraModel& cam) {
  return b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= cam.image_width && b.y_max <= cam.image_height;
}

Vec3 translation_through_pixel(double u, double v, double range, const CameraModel& cam) {
  const Vec3 ray((u - cam.principal_point.x()) / cam.focal_px, (v - cam.principal_point.y()) / cam.focal_px, 1.0);
  return range * ray.normalized();
}

const ScenarioCategory* category_of(const ScenarioConfig& cfg, std::uint64_t index) {
  std::uint64_t start = 0;
  for (const auto& cat : cfg.composition) {
    if (index < start + static_cast<std::uint64_t>(cat.count)) return &cat;
    start += static_cast<std::uint64_t>(cat.count);
  }
  return nullptr;
}

}  // namespace

DatasetRecord sample_scenario(const ScenarioConfig& cfg, const KeypointSet& kps, const MeshModel& mesh,
                              std::uint64_t index) {
  const CameraModel cam = cfg.camera();
  std::mt19937_64 rng(derive_seed(cfg.seed, index, kScenarioSalt));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DatasetRecord rec;
  rec.id = index;
  rec.camera_preset = cfg.camera_preset;
  rec.pose.rotation = random_rotation(rng);
  const double range = cfg.distance_min + (cfg.distance_max - cfg.distance_min) * unit(rng);

  const ScenarioCategory* cat = category_of(cfg, index);
  if (cat) {
    rec.category = cat->noise_preset;
    rec.out_of_frame = cat->out_of_frame;
    unit(rng);  // keep the stream aligned with the uncategorized path
  } else {
    rec.out_of_frame = unit(rng) < cfg.out_of_frame_fraction;
  }

  const Mat3 r = rec.pose.rotation.to_rotation_matrix();
  std::vector<Vec3> rotated(mesh.vertices.size());
  for (std::size_t k = 0; k < rotated.size(); ++k) rotated[k] = r * mesh.vertices[k];

  const Vec3 on_axis(0.0, 0.0, range);
  const Placement centered = place(rotated, on_axis, cam);
  Vec3 t = on_axis;
  Placement chosen = centered;
  if (rec.out_of_frame) {
    // Center anywhere in the frame; the silhouette may cross the border.
    for (int attempt = 0; attempt < kLateralAttempts; ++attempt) {
      const Vec3 cand = translation_through_pixel(unit(rng) * cam.image_width, unit(rng) * cam.image_height, range, cam);
      const Placement p = place(rotated, cand, cam);
      if (p.ok) {
        t = cand, chosen = p;
        break;
      }
    }
  } else {
    const Vec2 c = centered.bbox.center();
    const double hw = c.x() - centered.bbox.x_min, hh = c.y() - centered.bbox.y_min;
    const double hw2 = centered.bbox.x_max - c.x(), hh2 = centered.bbox.y_max - c.y();
    const double ulo = hw, uhi = cam.image_width - hw2, vlo = hh, vhi = cam.image_height - hh2;
    for (int attempt = 0; attempt < kLateralAttempts && ulo < uhi && vlo < vhi; ++attempt) {
      // Target bbox center, shifted by the on-axis center offset to get the optical ray.
      const double u = ulo + (uhi - ulo) * unit(rng) - (c.x() - cam.principal_point.x());
      const double v = vlo + (vhi - vlo) * unit(rng) - (c.y() - cam.principal_point.y());
      const Vec3 cand = translation_through_pixel(u, v, range, cam);
      const Placement p = place(rotated, cand, cam);
      if (p.ok && inside_image(p.bbox, cam)) {
        t = cand, chosen = p;
        break;
      }
    }
  }
  rec.pose.translation = t;
  rec.gt_bbox = chosen.bbox;
  rec.gt_keypoints_2d = project_points(rec.pose, cam, kps.points);
  return rec;
}

KeypointPredictions corrupt(const DatasetRecord& record, const KeypointSet& kps, const CameraModel& cam,
                            const RoI& roi, const NoiseModel& noise, const Quaternion& flip, std::mt19937_64& rng,
                            CorruptionTrace* trace) {
  const int n = static_cast<int>(kps.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double res = roi.crop_resolution;

  CorruptionTrace local;
  local.flipped = unit(rng) < noise.cluster_flip_fraction;
  local.pure_outlier = unit(rng) < noise.pure_outlier_fraction;

  std::vector<Vec2> centers(static_cast<std::size_t>(n));
  if (local.flipped) {
    const Pose flipped{record.pose.rotation * flip, record.pose.translation};
    const auto proj = project_points(flipped, cam, kps.points);
    for (int i = 0; i < n; ++i) centers[i] = to_crop(roi, proj[i]);
  } else {
    for (int i = 0; i < n; ++i) centers[i] = to_crop(roi, record.gt_keypoints_2d[i]);
  }

  KeypointPredictions pred(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kEstimatesPerKeypoint; ++j) {
      if (local.pure_outlier || (noise.outlier_fraction > 0.0 && unit(rng) < noise.outlier_fraction)) {
        pred.set(i, j, Vec2(res * unit(rng), res * unit(rng)));
      } else if (noise.gaussian_sigma_px > 0.0) {
        const double dx = gauss(rng), dy = gauss(rng);
        pred.set(i, j, centers[i] + noise.gaussian_sigma_px * Vec2(dx, dy));
      } else {
        pred.set(i, j, centers[i]);
      }
    }
  }
  if (trace) *trace = local;
  return pred;
}

void SplitFractions::validate() const {
  if (train < 0 || val < 0 || test < 0 || std::abs(train + val + test - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must be non-negative and sum to 1");
  }
}

void split_dataset(std::vector<DatasetRecord>& records, const SplitFractions& fractions, std::uint64_t seed) {
  fractions.validate();
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(seed, 0, kSplitSalt));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(records.size());
  const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * n));
  const auto n_val = std::min(records.size() - std::min(records.size(), n_train),
                              static_cast<std::size_t>(std::llround(fractions.val * n)));
  for (std::size_t k = 0; k < order.size(); ++k) {
    Split s = Split::kTest;
    if (k < n_train) {
      s = Split::kTrain;
    } else if (k < n_train + n_val) {
      s = Split::kVal;
    }
    records[order[k]].split = s;
  }
}

std::vector<DatasetRecord> generate_dataset(const ScenarioConfig& cfg, const KeypointSet& kps, const MeshModel& mesh) {
  cfg.validate();
  const int total = cfg.total_images();
  std::vector<DatasetRecord> records;
  records.reserve(static_cast<std::size_t>(total));
  for (int k = 0; k < total; ++k) records.push_back(sample_scenario(cfg, kps, mesh, static_cast<std::uint64_t>(k)));
  split_dataset(records, cfg.split, cfg.seed);
  return records;
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["id"] = r.id;
    const auto& q = r.pose.rotation;
    j["q"] = {q.w, q.x, q.y, q.z};
    j["t"] = {r.pose.translation.x(), r.pose.translation.y(), r.pose.translation.z()};
    j["bbox"] = {r.gt_bbox.x_min, r.gt_bbox.y_min, r.gt_bbox.x_max, r.gt_bbox.y_max};
    j["camera"] = r.camera_preset;
    j["split"] = std::string(to_string(r.split));
    if (!r.category.empty()) j["category"] = r.category;
    if (r.out_of_frame) j["out_of_frame"] = true;
    out << j.dump() << '\n';
  }
}

std::vector<DatasetRecord> read_dataset(std::istream& in, const KeypointSet& kps) {
  std::vector<DatasetRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DatasetRecord r;
      r.id = j.at("id").get<std::uint64_t>();
      const auto& q = j.at("q");
      r.pose.rotation = Quaternion::normalized(q.at(0), q.at(1), q.at(2), q.at(3));
      const auto& t = j.at("t");
      r.pose.translation = Vec3(t.at(0), t.at(1), t.at(2));
      const auto& b = j.at("bbox");
      r.gt_bbox = {b.at(0), b.at(1), b.at(2), b.at(3)};
      r.camera_preset = j.at("camera").get<std::string>();
      r.split = parse_split(j.at("split").get<std::string>());
      r.category = j.value("category", std::string{});
      r.out_of_frame = j.value("out_of_frame", false);
      r.gt_keypoints_2d = project_points(r.pose, camera_preset(r.camera_preset), kps.points);
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void save_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_dataset(out, records);
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path, const KeypointSet& kps) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_dataset(in, kps);
}

}  // namespace orbitpose
