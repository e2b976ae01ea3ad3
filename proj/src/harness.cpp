#include "orbitpose/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "orbitpose/error.hpp"
#include "orbitpose/rng.hpp"

namespace orbitpose {

namespace {

constexpr std::uint64_t kDetectorSalt = 0xde7ec7;
constexpr std::uint64_t kCorruptSalt = 0xc0de;
constexpr std::uint64_t kRansacSalt = 0x4a45;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

BBox offset_box(const BBox& gt, const std::array<double, 4>& dir, double s) {
  const double w = gt.width(), h = gt.height();
  return {gt.x_min + s * dir[0] * w, gt.y_min + s * dir[1] * h, gt.x_max + s * dir[2] * w, gt.y_max + s * dir[3] * h};
}

double safe_iou(const BBox& a, const BBox& b) { return b.valid() ? iou(a, b) : 0.0; }

}  // namespace

BBox jitter_bbox(const BBox& gt, double iou_target, std::mt19937_64& rng) {
  if (!(iou_target > 0.0 && iou_target <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "iou_target must lie in (0, 1]");
  }
  std::normal_distribution<double> g(0.0, 1.0);
  std::array<double, 4> dir{};
  double norm = 0.0;
  while (norm < 1e-6) {
    for (auto& d : dir) d = g(rng);
    norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2] + dir[3] * dir[3]);
  }
  for (auto& d : dir) d /= norm;
  if (iou_target >= 1.0) return gt;

  double lo = 0.0, hi = 0.05;
  while (safe_iou(gt, offset_box(gt, dir, hi)) > iou_target && hi < 1e3) hi *= 2.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (safe_iou(gt, offset_box(gt, dir, mid)) > iou_target ? lo : hi) = mid;
  }
  BBox out = offset_box(gt, dir, lo);
  return out.valid() ? out : gt;
}

void PipelineConfig::validate() const {
  ransac.validate();
  if (!(gate_threshold > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gate threshold must be > 0");
  make_estimator(estimator);
  noise.validate();
  if (!(roi_expansion >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "roi_expansion must be >= 1");
  if (!(detector.iou_target > 0.0 && detector.iou_target <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "detector iou_target must lie in (0, 1]");
  }
  if (!(detector.fail_probability >= 0.0 && detector.fail_probability <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "detector fail_probability must lie in [0, 1]");
  }
}

SymmetryGroup PipelineConfig::symmetry() const {
  return symmetry_axis.norm() > 0.0 ? SymmetryGroup::two_fold(symmetry_axis) : SymmetryGroup::trivial();
}

std::string_view to_string(NoDetectionReason r) {
  switch (r) {
    case NoDetectionReason::kNone: return "none";
    case NoDetectionReason::kDetectorFail: return "detector_fail";
    case NoDetectionReason::kRansacFail: return "ransac_fail";
    case NoDetectionReason::kGateReject: return "gate_reject";
  }
  return "unknown";
}

PipelineResult run_pipeline(const DatasetRecord& record, const Target& target, const PipelineConfig& cfg,
                            const PipelineOptions& opts) {
  const auto t_total = Clock::now();
  PipelineResult out;
  out.record_id = record.id;
  const CameraModel cam = camera_preset(record.camera_preset);
  const auto& kps = target.keypoints;

  // Detection emulation and RoI.
  auto t0 = Clock::now();
  std::mt19937_64 det_rng(derive_seed(cfg.seed, record.id, kDetectorSalt));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool missed = unit(det_rng) < cfg.detector.fail_probability;
  out.detected_bbox = cfg.detector.mode == DetectorMode::kJittered
                          ? jitter_bbox(record.gt_bbox, cfg.detector.iou_target, det_rng)
                          : record.gt_bbox;
  out.roi = square_and_expand(out.detected_bbox, cfg.roi_expansion);
  out.iou = iou(out.detected_bbox, record.gt_bbox);
  out.roi_contains_gt = roi_contains(out.roi, record.gt_bbox);
  out.timings.roi_ms = ms_since(t0);
  if (missed) {
    out.reason = NoDetectionReason::kDetectorFail;
    out.detail = "emulated missed detection";
    out.timings.total_ms = ms_since(t_total);
    return out;
  }

  // Stand-in for the keypoint network: synthesize its output field.
  KeypointPredictions synthesized;
  if (opts.replay) {
    synthesized = *opts.replay;
  } else {
    std::mt19937_64 noise_rng(derive_seed(cfg.seed, record.id, kCorruptSalt));
    const NoiseModel noise =
        (cfg.per_record_noise && !record.category.empty()) ? noise_preset(record.category) : cfg.noise;
    const SymmetryGroup sym = cfg.symmetry();
    const Quaternion flip = sym.rotations.size() > 1 ? sym.rotations[1] : Quaternion::identity();
    synthesized = corrupt(record, kps, cam, out.roi, noise, flip, noise_rng, &out.trace);
  }
  const DisplacementField field = field_from_predictions(synthesized);
  if (opts.field_out) *opts.field_out = field;

  t0 = Clock::now();
  const KeypointPredictions pred = decode(field);
  out.timings.field_decode_ms = ms_since(t0);

  t0 = Clock::now();
  RansacParams rp = cfg.ransac;
  rp.seed = derive_seed(cfg.seed ^ cfg.ransac.seed, record.id, kRansacSalt);
  RansacFailure why = RansacFailure::kNone;
  out.pnp = ransac_pnp(pred, kps, out.roi, cam, rp, &why);
  out.timings.pnp_ms = ms_since(t0);
  if (!out.pnp) {
    out.reason = NoDetectionReason::kRansacFail;
    out.detail = std::string(to_string(why));
    out.timings.total_ms = ms_since(t_total);
    return out;
  }

  std::vector<Vec2> gt_crop(kps.size());
  for (std::size_t i = 0; i < gt_crop.size(); ++i) gt_crop[i] = to_crop(out.roi, record.gt_keypoints_2d[i]);

  // Error prediction: silhouette for the cutout, estimator, threshold.
  t0 = Clock::now();
  if (cfg.rasterize_mask && !target.mesh.vertices.empty()) {
    try {
      BinaryMask mask = rasterize_mask(target.mesh, out.pnp->pose, cam, out.roi);
      out.mask_area = mask_area(mask);
      if (opts.mask_out) *opts.mask_out = std::move(mask);
    } catch (const Error&) {
      out.mask_area = 0;
    }
  }
  const auto estimator = make_estimator(cfg.estimator);
  const double e_k_hat = estimator->estimate({pred, *out.pnp, kps, out.roi, cam, gt_crop});
  out.decision = gate(e_k_hat, cfg.gate_threshold);
  out.timings.gate_ms = ms_since(t0);

  const SymmetryGroup sym = cfg.symmetry();
  ErrorReport report = evaluate_pose(record.pose, out.pnp->pose, &sym);
  report.e_k_hat = e_k_hat;
  report.e_k = keypoint_error(pred, gt_crop);
  out.report = report;
  if (!out.decision->accepted) {
    out.reason = NoDetectionReason::kGateReject;
    out.detail = "e_k_hat above threshold";
  }
  out.timings.total_ms = ms_since(t_total);
  return out;
}

Histogram build_histogram(const std::vector<double>& values, const std::vector<bool>& rejected, int bins) {
  if (values.empty()) throw Error(ErrorCode::kEmptyDataset, "histogram of an empty list");
  if (values.size() != rejected.size()) throw Error(ErrorCode::kDimensionMismatch, "histogram flag count");
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "histogram needs at least one bin");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size())));
  double hi = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
  if (!(hi > lo)) hi = sorted.back() > lo ? sorted.back() : lo + 1.0;

  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * b / bins;
  h.accepted.assign(static_cast<std::size_t>(bins), 0);
  h.rejected.assign(static_cast<std::size_t>(bins), 0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    int b = static_cast<int>((values[k] - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    (rejected[k] ? h.rejected : h.accepted)[b] += 1;
  }
  return h;
}

CampaignResult run_campaign(const std::vector<DatasetRecord>& records, const Target& target,
                            const PipelineConfig& cfg, int threads) {
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "campaign over an empty dataset");
  cfg.validate();
  std::vector<PipelineResult> results(records.size());

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(records.size())));
  auto work = [&](int w) {
    for (std::size_t k = static_cast<std::size_t>(w); k < records.size(); k += static_cast<std::size_t>(workers)) {
      results[k] = run_pipeline(records[k], target, cfg);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return summarize_campaign(std::move(results), cfg);
}

CampaignResult summarize_campaign(std::vector<PipelineResult> results, const PipelineConfig& cfg) {
  if (results.empty()) throw Error(ErrorCode::kEmptyDataset, "campaign over an empty dataset");
  CampaignResult out;
  out.gate_threshold = cfg.gate_threshold;
  out.results = std::move(results);

  std::vector<ErrorReport> reports;
  std::vector<bool> rejected;
  std::vector<double> ious;
  std::size_t contained = 0;
  for (const auto& r : out.results) {
    ious.push_back(r.iou);
    contained += r.roi_contains_gt;
    switch (r.reason) {
      case NoDetectionReason::kDetectorFail: ++out.detector_failures; break;
      case NoDetectionReason::kRansacFail: ++out.ransac_failures; break;
      case NoDetectionReason::kGateReject: ++out.gate_rejections; break;
      case NoDetectionReason::kNone: break;
    }
    if (r.has_pose()) {
      reports.push_back(*r.report);
      rejected.push_back(!r.decision->accepted);
    }
  }
  out.roi_accuracy = static_cast<double>(contained) / static_cast<double>(out.results.size());
  out.iou_median = median(ious);
  out.iou_mean = mean(ious);
  if (reports.empty()) throw Error(ErrorCode::kEmptyDataset, "no record produced a pose estimate");
  out.summary = aggregate(reports, rejected);

  std::vector<double> e_t, e_r;
  for (const auto& r : reports) {
    e_t.push_back(r.e_t);
    e_r.push_back(r.e_r_deg());
  }
  out.hist_e_t = build_histogram(e_t, rejected);
  out.hist_e_r = build_histogram(e_r, rejected);
  return out;
}

const StageStat* StageTimings::find(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.stage == stage) return &s;
  }
  return nullptr;
}

StageTimings summarize_timings(const std::vector<StageSample>& samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyDataset, "no timing samples");
  StageTimings t;
  t.frames = samples.size();
  auto add = [&](const char* name, double StageSample::*field) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.*field);
    t.stages.push_back({name, mean(v), median(v)});
  };
  add("roi", &StageSample::roi_ms);
  add("field_decode", &StageSample::field_decode_ms);
  add("pnp", &StageSample::pnp_ms);
  add("gate", &StageSample::gate_ms);
  add("total", &StageSample::total_ms);
  const double mean_total = t.stages.back().mean_ms;
  t.effective_hz = mean_total > 0.0 ? 1000.0 / mean_total : 0.0;
  return t;
}

StageTimings run_benchmark(const std::vector<DatasetRecord>& records, const Target& target,
                           const PipelineConfig& cfg, double duration_s) {
  if (!(duration_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "benchmark duration must be > 0");
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "benchmark over an empty dataset");
  cfg.validate();
  constexpr std::size_t kWarmup = 16;
  for (std::size_t k = 0; k < std::min(kWarmup, records.size()); ++k) run_pipeline(records[k], target, cfg);

  std::vector<StageSample> samples;
  const auto deadline = Clock::now() + std::chrono::duration<double>(duration_s);
  std::size_t k = 0;
  do {
    samples.push_back(run_pipeline(records[k], target, cfg).timings);
    k = (k + 1) % records.size();
  } while (Clock::now() < deadline);
  return summarize_timings(samples);
}

}  // namespace orbitpose
