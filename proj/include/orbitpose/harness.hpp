#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "orbitpose/gate.hpp"
#include "orbitpose/metrics.hpp"
#include "orbitpose/pnp.hpp"
#include "orbitpose/synth.hpp"

namespace orbitpose {

enum class DetectorMode { kPerfect, kJittered };

struct DetectorEmulation {
  DetectorMode mode = DetectorMode::kPerfect;
  /// Jittered mode: every emulated detection has exactly this IoU with the ground-truth box.
  double iou_target = 0.92;
  /// Probability of emulating a missed detection.
  double fail_probability = 0.0;
};

/// Perturbs the box corners along a random direction, scaled by bisection until IoU(gt, out) hits
/// the target.
BBox jitter_bbox(const BBox& gt, double iou_target, std::mt19937_64& rng);

struct PipelineConfig {
  RansacParams ransac;
  double gate_threshold = kDefaultGateThreshold;
  /// Target-frame symmetry axis; the group is {identity, 180 deg about it}. Zero disables.
  Vec3 symmetry_axis = Vec3::UnitZ();
  std::string estimator = "oracle";
  DetectorEmulation detector;
  NoiseModel noise;
  double roi_expansion = kRoiExpansion;
  bool rasterize_mask = true;
  /// Use a record's category noise preset (if any) instead of `noise`.
  bool per_record_noise = true;
  std::uint64_t seed = 0;

  void validate() const;
  SymmetryGroup symmetry() const;
};

/// The known target: selected keypoints plus the mesh used for silhouettes.
struct Target {
  KeypointSet keypoints;
  MeshModel mesh;
};

enum class NoDetectionReason { kNone, kDetectorFail, kRansacFail, kGateReject };
std::string_view to_string(NoDetectionReason r);

struct StageSample {
  double roi_ms = 0.0;
  double field_decode_ms = 0.0;
  double pnp_ms = 0.0;
  double gate_ms = 0.0;
  double total_ms = 0.0;
};

struct PipelineResult {
  std::uint64_t record_id = 0;
  NoDetectionReason reason = NoDetectionReason::kNone;
  std::string detail;
  std::optional<ErrorReport> report;      // set whenever a pose was solved
  std::optional<GateDecision> decision;   // set whenever a pose was solved
  std::optional<PnPResult> pnp;
  BBox detected_bbox;
  RoI roi;
  double iou = 0.0;
  bool roi_contains_gt = false;
  CorruptionTrace trace;
  std::size_t mask_area = 0;
  StageSample timings;

  bool has_pose() const { return report.has_value(); }
  bool accepted() const { return reason == NoDetectionReason::kNone; }
};

struct PipelineOptions {
  /// Replay these crop-frame predictions instead of synthesizing them.
  const KeypointPredictions* replay = nullptr;
  /// Keep the displacement field that was decoded (for dumping).
  DisplacementField* field_out = nullptr;
  BinaryMask* mask_out = nullptr;
};

/// Detection emulation → RoI → synthesized field → decode → RANSAC-EPnP → metrics → gate.
PipelineResult run_pipeline(const DatasetRecord& record, const Target& target, const PipelineConfig& cfg,
                            const PipelineOptions& opts = {});

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> accepted;
  std::vector<std::size_t> rejected;

  std::size_t bins() const { return accepted.size(); }
};

/// Uniform bins over [min, 99th percentile]; larger values land in the last bin.
Histogram build_histogram(const std::vector<double>& values, const std::vector<bool>& rejected, int bins = 30);

struct CampaignResult {
  std::vector<PipelineResult> results;
  SummaryPair summary;  // over records with a solved pose; rejection = gate rejection
  double roi_accuracy = 0.0;
  double iou_median = 0.0;
  double iou_mean = 0.0;
  std::size_t detector_failures = 0;
  std::size_t ransac_failures = 0;
  std::size_t gate_rejections = 0;
  Histogram hist_e_t;
  Histogram hist_e_r;
  double gate_threshold = kDefaultGateThreshold;
};

/// Runs every record (optionally on several threads; results do not depend on the thread count).
/// Throws EmptyDataset when `records` is empty or no record produced a pose.
CampaignResult run_campaign(const std::vector<DatasetRecord>& records, const Target& target,
                            const PipelineConfig& cfg, int threads = 1);

/// Aggregation step of run_campaign, for results produced record by record.
CampaignResult summarize_campaign(std::vector<PipelineResult> results, const PipelineConfig& cfg);

struct StageStat {
  std::string stage;
  double mean_ms = 0.0;
  double median_ms = 0.0;
};

struct StageTimings {
  std::vector<StageStat> stages;  // roi, field_decode, pnp, gate, total
  std::size_t frames = 0;
  double effective_hz = 0.0;

  const StageStat* find(std::string_view stage) const;
};

StageTimings summarize_timings(const std::vector<StageSample>& samples);

/// Single-threaded loop over the dataset for `duration_s` seconds after one warm-up pass.
StageTimings run_benchmark(const std::vector<DatasetRecord>& records, const Target& target,
                           const PipelineConfig& cfg, double duration_s);

}  // namespace orbitpose
