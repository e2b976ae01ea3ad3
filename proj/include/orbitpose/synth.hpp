#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "orbitpose/displacement_field.hpp"
#include "orbitpose/keypoints.hpp"
#include "orbitpose/mesh.hpp"
#include "orbitpose/roi.hpp"

namespace orbitpose {

/// Stand-in for keypoint-network error characteristics, in crop-frame pixels.
struct NoiseModel {
  double gaussian_sigma_px = 0.0;
  /// Per-estimate probability of being replaced by a uniform point in [0, 224)².
  double outlier_fraction = 0.0;
  /// Per-record probability that every keypoint is predicted at its location under the
  /// symmetry-flipped pose.
  double cluster_flip_fraction = 0.0;
  /// Per-record probability that every estimate is uniform noise (a catastrophic prediction).
  double pure_outlier_fraction = 0.0;

  void validate() const;
};

/// Named presets: clean, nominal, glare, blur, calibrated, pure_outlier.
NoiseModel noise_preset(std::string_view name);

struct SplitFractions {
  double train = 0.64;
  double val = 0.16;
  double test = 0.20;

  void validate() const;
};

enum class Split { kTrain, kVal, kTest };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// One block of a dataset composition: `count` images drawn with a given noise preset.
struct ScenarioCategory {
  std::string description;
  int count = 0;
  std::string noise_preset;
  bool out_of_frame = false;
};

/// Eight image categories totalling 20,000 at scale 1; counts are scaled (rounded) by `scale`.
std::vector<ScenarioCategory> standard_composition(double scale = 1.0);

struct ScenarioConfig {
  std::string camera_preset = "cygnus";
  double distance_min = 35.0;
  double distance_max = 75.0;
  int n_images = 1000;
  NoiseModel corruption;
  SplitFractions split;
  std::uint64_t seed = 0;
  double out_of_frame_fraction = 0.0;
  /// When non-empty, overrides n_images: records are assigned to categories in order.
  std::vector<ScenarioCategory> composition;

  void validate() const;
  CameraModel camera() const { return orbitpose::camera_preset(camera_preset); }
  int total_images() const;
};

struct DatasetRecord {
  std::uint64_t id = 0;
  Pose pose;
  std::vector<Vec2> gt_keypoints_2d;  // full-image pixels; regenerated from pose, not authoritative
  BBox gt_bbox;
  std::string camera_preset = "cygnus";
  Split split = Split::kTrain;
  std::string category;  // noise preset name from a composition; empty means the run's noise model
  bool out_of_frame = false;
};

/// Random pose for record `index`: uniform rotation, uniform range, lateral offset inside the view
/// frustum. Deterministic per (cfg.seed, index).
DatasetRecord sample_scenario(const ScenarioConfig& cfg, const KeypointSet& kps, const MeshModel& mesh,
                              std::uint64_t index);

/// Rotation drawn uniformly from SO(3).
Quaternion random_rotation(std::mt19937_64& rng);

struct CorruptionTrace {
  bool flipped = false;
  bool pure_outlier = false;
};

/// Synthesized network output in the RoI crop frame. `flip` is the symmetry rotation (target frame)
/// used for cluster flips.
KeypointPredictions corrupt(const DatasetRecord& record, const KeypointSet& kps, const CameraModel& cam,
                            const RoI& roi, const NoiseModel& noise, const Quaternion& flip, std::mt19937_64& rng,
                            CorruptionTrace* trace = nullptr);

/// Seeded shuffle followed by contiguous train/val/test assignment.
void split_dataset(std::vector<DatasetRecord>& records, const SplitFractions& fractions, std::uint64_t seed);

std::vector<DatasetRecord> generate_dataset(const ScenarioConfig& cfg, const KeypointSet& kps, const MeshModel& mesh);

/// One JSON object per line: id, q [w,x,y,z], t [m], bbox [x_min,y_min,x_max,y_max], camera, split,
/// plus optional category and out_of_frame.
void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);
/// Keypoints are regenerated from each record's pose and camera preset.
std::vector<DatasetRecord> read_dataset(std::istream& in, const KeypointSet& kps);
void save_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path, const KeypointSet& kps);

}  // namespace orbitpose
