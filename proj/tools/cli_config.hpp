#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "orbitpose/harness.hpp"

namespace orbitpose::cli {

struct TargetSource {
  std::string mesh = "cygnus";        // "cygnus", "box", or an OBJ path
  std::string keypoints;              // keypoint table path; empty selects from the mesh
  int n_keypoints = 20;
  std::uint64_t keypoint_seed = 1;
  double oversample = 5.0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  TargetSource target;
  ScenarioConfig scenario;
  std::string composition;            // "" or "standard"
  double composition_scale = 1.0;
  PipelineConfig pipeline;
  int threads = 1;
  double bench_duration_s = 5.0;
};

/// Reads the declarative config. Unknown keys and wrong types are errors (InvalidArgument / ParseError).
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Noise given either as a preset name or as an object with explicit fields.
NoiseModel parse_noise(const nlohmann::json& j);

MeshModel load_mesh(const std::string& source);
Target load_target(const TargetSource& src);

}  // namespace orbitpose::cli
