#include "cli_config.hpp"

#include <fstream>
#include <set>

#include "orbitpose/error.hpp"

namespace orbitpose::cli {
namespace {

using nlohmann::json;

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, std::string(section) + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) throw Error(ErrorCode::kInvalidArgument, "unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->get<T>();
}

Vec3 read_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kInvalidArgument, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

DetectorMode parse_detector_mode(const std::string& s) {
  if (s == "perfect") return DetectorMode::kPerfect;
  if (s == "jittered") return DetectorMode::kJittered;
  throw Error(ErrorCode::kInvalidArgument, "detector mode must be 'perfect' or 'jittered', got '" + s + "'");
}

}  // namespace

NoiseModel parse_noise(const json& j) {
  if (j.is_string()) return noise_preset(j.get<std::string>());
  check_keys(j, "noise", {"preset", "gaussian_sigma_px", "outlier_fraction", "cluster_flip_fraction", "pure_outlier_fraction"});
  NoiseModel n;
  if (j.contains("preset")) n = noise_preset(j["preset"].get<std::string>());
  read(j, "gaussian_sigma_px", n.gaussian_sigma_px);
  read(j, "outlier_fraction", n.outlier_fraction);
  read(j, "cluster_flip_fraction", n.cluster_flip_fraction);
  read(j, "pure_outlier_fraction", n.pure_outlier_fraction);
  n.validate();
  return n;
}

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  try {
    check_keys(j, "config", {"seed", "target", "scenario", "pipeline", "threads", "bench"});
    read(j, "seed", cfg.seed);
    read(j, "threads", cfg.threads);

    if (const auto it = j.find("target"); it != j.end()) {
      check_keys(*it, "target", {"mesh", "keypoints", "n_keypoints", "keypoint_seed", "oversample"});
      read(*it, "mesh", cfg.target.mesh);
      read(*it, "keypoints", cfg.target.keypoints);
      read(*it, "n_keypoints", cfg.target.n_keypoints);
      read(*it, "keypoint_seed", cfg.target.keypoint_seed);
      read(*it, "oversample", cfg.target.oversample);
    }

    if (const auto it = j.find("scenario"); it != j.end()) {
      check_keys(*it, "scenario", {"camera", "distance_min", "distance_max", "n_images", "noise", "split",
                                   "out_of_frame_fraction", "composition", "composition_scale"});
      auto& s = cfg.scenario;
      read(*it, "camera", s.camera_preset);
      read(*it, "distance_min", s.distance_min);
      read(*it, "distance_max", s.distance_max);
      read(*it, "n_images", s.n_images);
      read(*it, "out_of_frame_fraction", s.out_of_frame_fraction);
      if (it->contains("noise")) s.corruption = parse_noise((*it)["noise"]);
      if (it->contains("split")) {
        const auto& sp = (*it)["split"];
        if (!sp.is_array() || sp.size() != 3) throw Error(ErrorCode::kInvalidArgument, "split must be [train, val, test]");
        s.split = {sp[0].get<double>(), sp[1].get<double>(), sp[2].get<double>()};
      }
      read(*it, "composition", cfg.composition);
      read(*it, "composition_scale", cfg.composition_scale);
    }

    if (const auto it = j.find("pipeline"); it != j.end()) {
      check_keys(*it, "pipeline", {"gate_threshold", "estimator", "symmetry_axis", "detector", "noise", "roi_expansion",
                                   "rasterize_mask", "per_record_noise", "ransac"});
      auto& p = cfg.pipeline;
      read(*it, "gate_threshold", p.gate_threshold);
      read(*it, "estimator", p.estimator);
      read(*it, "roi_expansion", p.roi_expansion);
      read(*it, "rasterize_mask", p.rasterize_mask);
      read(*it, "per_record_noise", p.per_record_noise);
      if (it->contains("symmetry_axis")) {
        const auto& ax = (*it)["symmetry_axis"];
        p.symmetry_axis = ax.is_null() ? Vec3::Zero() : read_vec3(ax);
      }
      if (it->contains("noise")) p.noise = parse_noise((*it)["noise"]);
      if (const auto d = it->find("detector"); d != it->end()) {
        check_keys(*d, "detector", {"mode", "iou_target", "fail_probability"});
        if (d->contains("mode")) p.detector.mode = parse_detector_mode((*d)["mode"].get<std::string>());
        read(*d, "iou_target", p.detector.iou_target);
        read(*d, "fail_probability", p.detector.fail_probability);
      }
      if (const auto r = it->find("ransac"); r != it->end()) {
        check_keys(*r, "ransac", {"max_iterations", "reproj_threshold_px", "confidence", "min_inliers"});
        read(*r, "max_iterations", p.ransac.max_iterations);
        read(*r, "reproj_threshold_px", p.ransac.reproj_threshold_px);
        read(*r, "confidence", p.ransac.confidence);
        read(*r, "min_inliers", p.ransac.min_inliers);
      }
    }

    if (const auto it = j.find("bench"); it != j.end()) {
      check_keys(*it, "bench", {"duration_s"});
      read(*it, "duration_s", cfg.bench_duration_s);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingConfig, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

MeshModel load_mesh(const std::string& source) {
  if (source == "cygnus") return make_cygnus_like_mesh();
  if (source == "box") return make_box_mesh(Vec3(1, 1, 1));
  return load_obj(source);
}

Target load_target(const TargetSource& src) {
  Target t;
  t.mesh = load_mesh(src.mesh);
  if (!src.keypoints.empty()) {
    t.keypoints = load_keypoint_table(src.keypoints);
  } else {
    t.keypoints = select_keypoints(t.mesh, src.n_keypoints, src.keypoint_seed, {src.oversample});
  }
  return t;
}

}  // namespace orbitpose::cli
