#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_config.hpp"
#include "orbitpose/error.hpp"
#include "orbitpose/report.hpp"
#include "orbitpose/simd.hpp"

namespace fs = std::filesystem;
using namespace orbitpose;

namespace {

// Flag values; unset ones leave the config file (or built-in default) in place.
struct TargetFlags {
  std::optional<std::string> mesh, keypoints;
  std::optional<int> n_keypoints;
  std::optional<std::uint64_t> keypoint_seed;
  std::optional<double> oversample;

  void attach(CLI::App* app) {
    app->add_option("--mesh", mesh, "cygnus, box, or an OBJ file");
    app->add_option("--keypoints", keypoints, "keypoint table (x y z rows); overrides selection");
    app->add_option("--n-keypoints", n_keypoints, "number of keypoints to select");
    app->add_option("--keypoint-seed", keypoint_seed, "seed for keypoint selection");
    app->add_option("--oversample", oversample, "candidate pool factor for selection");
  }
  void apply(cli::TargetSource& t) const {
    if (mesh) t.mesh = *mesh;
    if (keypoints) t.keypoints = *keypoints;
    if (n_keypoints) t.n_keypoints = *n_keypoints;
    if (keypoint_seed) t.keypoint_seed = *keypoint_seed;
    if (oversample) t.oversample = *oversample;
  }
};

struct ScenarioFlags {
  std::optional<std::string> camera, composition;
  std::optional<double> distance_min, distance_max, out_of_frame, composition_scale;
  std::optional<int> n_images;
  std::optional<std::vector<double>> split;

  void attach(CLI::App* app) {
    app->add_option("--camera", camera, "camera preset: cygnus or speed");
    app->add_option("--distance-min", distance_min, "minimum range (m)");
    app->add_option("--distance-max", distance_max, "maximum range (m)");
    app->add_option("--n-images", n_images, "number of records");
    app->add_option("--out-of-frame", out_of_frame, "fraction of records allowed to leave the frame");
    app->add_option("--split", split, "train val test fractions")->expected(3);
    app->add_option("--composition", composition, "\"standard\" for the eight-category mix, empty for none");
    app->add_option("--composition-scale", composition_scale, "scale applied to category counts");
  }
  void apply(cli::RunConfig& c) const {
    auto& s = c.scenario;
    if (camera) s.camera_preset = *camera;
    if (distance_min) s.distance_min = *distance_min;
    if (distance_max) s.distance_max = *distance_max;
    if (n_images) s.n_images = *n_images;
    if (out_of_frame) s.out_of_frame_fraction = *out_of_frame;
    if (split) s.split = {(*split)[0], (*split)[1], (*split)[2]};
    if (composition) c.composition = *composition;
    if (composition_scale) c.composition_scale = *composition_scale;
  }
};

struct PipelineFlags {
  std::optional<double> threshold, iou_target, detector_fail, roi_expansion;
  std::optional<std::string> estimator, detector, noise;
  std::optional<double> sigma, outliers, flip, pure_outlier;
  std::optional<std::vector<double>> symmetry_axis;
  bool no_symmetry = false, no_mask = false, no_record_noise = false;
  std::optional<int> iterations, min_inliers, threads;
  std::optional<double> reproj, confidence;

  void attach(CLI::App* app) {
    app->add_option("--threshold", threshold, "gate threshold on the estimated keypoint error (px)");
    app->add_option("--estimator", estimator, "oracle or dispersion");
    app->add_option("--detector", detector, "perfect or jittered");
    app->add_option("--iou-target", iou_target, "IoU of jittered detections");
    app->add_option("--detector-fail", detector_fail, "probability of an emulated missed detection");
    app->add_option("--noise", noise, "noise preset: clean, nominal, glare, blur, calibrated, pure_outlier");
    app->add_option("--sigma", sigma, "Gaussian noise on each estimate (crop px)");
    app->add_option("--outliers", outliers, "fraction of estimates replaced by uniform points");
    app->add_option("--flip", flip, "fraction of records predicted under the symmetry flip");
    app->add_option("--pure-outlier", pure_outlier, "fraction of records with all-noise predictions");
    app->add_option("--symmetry-axis", symmetry_axis, "target-frame axis of the two-fold symmetry")->expected(3);
    app->add_flag("--no-symmetry", no_symmetry, "disable the symmetric rotation metric");
    app->add_option("--roi-expansion", roi_expansion, "RoI scale about the detected box");
    app->add_flag("--no-mask", no_mask, "skip silhouette rasterization");
    app->add_flag("--no-record-noise", no_record_noise, "ignore per-record category noise presets");
    app->add_option("--ransac-iterations", iterations, "RANSAC iteration cap");
    app->add_option("--reproj-threshold", reproj, "RANSAC inlier threshold (full-image px)");
    app->add_option("--confidence", confidence, "RANSAC early-exit confidence");
    app->add_option("--min-inliers", min_inliers, "minimum consensus; 0 for automatic");
    app->add_option("--threads", threads, "worker threads for evaluation");
  }
  void apply(cli::RunConfig& c) const {
    auto& p = c.pipeline;
    if (threshold) p.gate_threshold = *threshold;
    if (estimator) p.estimator = *estimator;
    if (detector) {
      if (*detector == "perfect") {
        p.detector.mode = DetectorMode::kPerfect;
      } else if (*detector == "jittered") {
        p.detector.mode = DetectorMode::kJittered;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "--detector must be perfect or jittered");
      }
    }
    if (iou_target) p.detector.iou_target = *iou_target;
    if (detector_fail) p.detector.fail_probability = *detector_fail;
    if (noise) p.noise = noise_preset(*noise);
    if (sigma) p.noise.gaussian_sigma_px = *sigma;
    if (outliers) p.noise.outlier_fraction = *outliers;
    if (flip) p.noise.cluster_flip_fraction = *flip;
    if (pure_outlier) p.noise.pure_outlier_fraction = *pure_outlier;
    if (symmetry_axis) p.symmetry_axis = Vec3((*symmetry_axis)[0], (*symmetry_axis)[1], (*symmetry_axis)[2]);
    if (no_symmetry) p.symmetry_axis = Vec3::Zero();
    if (roi_expansion) p.roi_expansion = *roi_expansion;
    if (no_mask) p.rasterize_mask = false;
    if (no_record_noise) p.per_record_noise = false;
    if (iterations) p.ransac.max_iterations = *iterations;
    if (reproj) p.ransac.reproj_threshold_px = *reproj;
    if (confidence) p.ransac.confidence = *confidence;
    if (min_inliers) p.ransac.min_inliers = *min_inliers;
    if (threads) c.threads = *threads;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  fn(out);
}

fs::path record_file(const fs::path& dir, std::uint64_t id, const char* ext) {
  return dir / ("record_" + std::to_string(id) + ext);
}

int cmd_keypoints(const cli::RunConfig& cfg, const std::string& out) {
  const Target t = cli::load_target(cfg.target);
  if (out.empty()) {
    write_keypoint_table(std::cout, t.keypoints);
  } else {
    write_with(out, [&](std::ostream& o) { write_keypoint_table(o, t.keypoints); });
    std::printf("wrote %zu keypoints to %s\n", t.keypoints.size(), out.c_str());
  }
  return 0;
}

int cmd_generate(cli::RunConfig cfg, const std::string& out) {
  if (cfg.composition == "standard") {
    cfg.scenario.composition = standard_composition(cfg.composition_scale);
  } else if (!cfg.composition.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown composition '" + cfg.composition + "'");
  }
  cfg.scenario.seed = cfg.seed;
  const Target t = cli::load_target(cfg.target);
  const auto records = generate_dataset(cfg.scenario, t.keypoints, t.mesh);
  save_dataset(out, records);
  std::printf("wrote %zu records to %s\n", records.size(), out.c_str());
  return 0;
}

struct EvalPaths {
  std::string dataset, out_dir, dump_fields, replay_fields, dump_masks;
};

int cmd_eval(cli::RunConfig cfg, const EvalPaths& paths) {
  cfg.pipeline.seed = cfg.seed;
  cfg.pipeline.validate();
  const Target t = cli::load_target(cfg.target);
  const auto records = load_dataset(paths.dataset, t.keypoints);
  fs::create_directories(paths.out_dir);

  CampaignResult c;
  const bool per_record = !paths.dump_fields.empty() || !paths.replay_fields.empty() || !paths.dump_masks.empty();
  if (!per_record) {
    c = run_campaign(records, t, cfg.pipeline, cfg.threads);
  } else {
    // Dumps and replays need per-record hooks; run sequentially and aggregate the same way.
    for (const auto* dir : {&paths.dump_fields, &paths.dump_masks}) {
      if (!dir->empty()) fs::create_directories(*dir);
    }
    std::vector<DatasetRecord> kept;
    std::vector<PipelineResult> results;
    for (const auto& rec : records) {
      PipelineOptions opts;
      DisplacementField field(static_cast<int>(t.keypoints.size()));
      BinaryMask mask;
      KeypointPredictions replay;
      if (!paths.replay_fields.empty()) {
        replay = decode(load_field(record_file(paths.replay_fields, rec.id, ".dfld")));
        opts.replay = &replay;
      }
      if (!paths.dump_fields.empty()) opts.field_out = &field;
      if (!paths.dump_masks.empty()) opts.mask_out = &mask;
      results.push_back(run_pipeline(rec, t, cfg.pipeline, opts));
      if (!paths.dump_fields.empty() && results.back().reason != NoDetectionReason::kDetectorFail) {
        save_field(record_file(paths.dump_fields, rec.id, ".dfld"), field);
      }
      if (!paths.dump_masks.empty() && mask.width > 0) save_mask_pgm(record_file(paths.dump_masks, rec.id, ".pgm"), mask);
    }
    c = summarize_campaign(std::move(results), cfg.pipeline);
  }

  const fs::path dir(paths.out_dir);
  write_with(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, c); });
  const std::string table = format_summary_table(c);
  write_file(dir / "report.txt", table);
  write_with(dir / "hist_e_t.csv", [&](std::ostream& o) { write_histogram_csv(o, c.hist_e_t); });
  write_with(dir / "hist_e_r.csv", [&](std::ostream& o) { write_histogram_csv(o, c.hist_e_r); });
  write_with(dir / "hist_e_t.svg", [&](std::ostream& o) { write_histogram_svg(o, c.hist_e_t, "Translation error", "E_T (m)"); });
  write_with(dir / "hist_e_r.svg", [&](std::ostream& o) { write_histogram_svg(o, c.hist_e_r, "Rotation error", "E_R (deg)"); });
  write_with(dir / "records.csv", [&](std::ostream& o) { write_records_csv(o, c); });
  std::cout << table;
  return 0;
}

int cmd_bench(cli::RunConfig cfg, const std::string& dataset, const std::string& out, const std::string& isa) {
  cfg.pipeline.seed = cfg.seed;
  if (isa == "scalar") {
    simd::set_active_isa(simd::Isa::kScalar);
  } else if (isa == "avx2") {
    simd::set_active_isa(simd::Isa::kAvx2);
  } else if (isa != "auto") {
    throw Error(ErrorCode::kInvalidArgument, "--isa must be auto, scalar or avx2");
  }
  const Target t = cli::load_target(cfg.target);
  const auto records = load_dataset(dataset, t.keypoints);
  const StageTimings timings = run_benchmark(records, t, cfg.pipeline, cfg.bench_duration_s);
  if (!out.empty()) write_with(out, [&](std::ostream& o) { write_timings_csv(o, timings); });
  std::printf("kernels: %s\n", std::string(simd::isa_name(simd::active_kernels().isa)).c_str());
  std::cout << format_timings_table(timings);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spacecraft pose pipeline: dataset synthesis, evaluation campaigns and stage benchmarks"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "global seed (dataset and pipeline streams)");

  TargetFlags target_flags;
  ScenarioFlags scenario_flags;
  PipelineFlags pipeline_flags;

  auto* keypoints = app.add_subcommand("keypoints", "select keypoints on a mesh and write them as a table");
  std::string kp_out;
  target_flags.attach(keypoints);
  keypoints->add_option("-o,--out", kp_out, "output table (stdout if omitted)");

  auto* generate = app.add_subcommand("generate", "sample a synthetic dataset (JSONL)");
  std::string gen_out;
  target_flags.attach(generate);
  scenario_flags.attach(generate);
  generate->add_option("-o,--out", gen_out, "dataset file")->required();

  auto* eval = app.add_subcommand("eval", "run an evaluation campaign and write reports");
  EvalPaths eval_paths;
  target_flags.attach(eval);
  pipeline_flags.attach(eval);
  eval->add_option("-d,--dataset", eval_paths.dataset, "dataset file")->required();
  eval->add_option("-o,--out-dir", eval_paths.out_dir, "report directory")->required();
  eval->add_option("--dump-fields", eval_paths.dump_fields, "write each record's displacement field here");
  eval->add_option("--replay-fields", eval_paths.replay_fields, "read displacement fields from here instead of synthesizing");
  eval->add_option("--dump-masks", eval_paths.dump_masks, "write each record's silhouette mask (PGM) here");

  auto* bench = app.add_subcommand("bench", "time the pipeline stages single-threaded");
  std::string bench_dataset, bench_out, isa = "auto";
  std::optional<double> duration;
  target_flags.attach(bench);
  pipeline_flags.attach(bench);
  bench->add_option("-d,--dataset", bench_dataset, "dataset file")->required();
  bench->add_option("--duration", duration, "measurement window (s)");
  bench->add_option("-o,--out", bench_out, "timings CSV");
  bench->add_option("--isa", isa, "kernel set: auto, scalar or avx2");

  CLI11_PARSE(app, argc, argv);

  try {
    cli::RunConfig cfg = config_path.empty() ? cli::RunConfig{} : cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    target_flags.apply(cfg.target);
    scenario_flags.apply(cfg);
    pipeline_flags.apply(cfg);
    if (duration) cfg.bench_duration_s = *duration;

    if (*keypoints) return cmd_keypoints(cfg, kp_out);
    if (*generate) return cmd_generate(cfg, gen_out);
    if (*eval) return cmd_eval(cfg, eval_paths);
    if (*bench) return cmd_bench(cfg, bench_dataset, bench_out, isa);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
