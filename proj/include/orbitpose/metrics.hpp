#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orbitpose/geometry.hpp"

namespace orbitpose {

/// Per-image pose errors. Rotation errors are radians; E_C uses radians.
struct ErrorReport {
  double e_r = 0.0;
  double e_t = 0.0;
  double e_tn = 0.0;
  double e_c = 0.0;
  std::optional<double> e_r_sym;
  std::optional<double> e_k_hat;  // estimated keypoint error, crop pixels
  std::optional<double> e_k;      // true keypoint error, crop pixels

  double e_r_deg() const;
};

/// Rotations the target is indistinguishable under; always contains the identity.
struct SymmetryGroup {
  std::vector<Quaternion> rotations{Quaternion::identity()};

  static SymmetryGroup trivial() { return {}; }
  /// {identity, 180 deg about `axis`} (target frame).
  static SymmetryGroup two_fold(const Vec3& axis);
};

/// 2 arccos(min(1, |q · q_hat|)), in [0, π].
double rotation_error(const Quaternion& q, const Quaternion& q_hat);

struct TranslationErrors {
  double e_t;
  double e_tn;
};
/// Throws ZeroGroundTruthRange when ‖t‖ = 0.
TranslationErrors translation_errors(const Vec3& t, const Vec3& t_hat);

double combined_error(double e_r_rad, double e_tn);

/// min over s in the group of rotation_error(q ⊗ s, q_hat).
double symmetric_rotation_error(const Quaternion& q, const Quaternion& q_hat, const SymmetryGroup& sym);

ErrorReport evaluate_pose(const Pose& truth, const Pose& estimate, const SymmetryGroup* sym = nullptr);

struct MetricStat {
  std::string name;
  double median = 0.0;
  double mean = 0.0;
};

struct EvalSummary {
  std::vector<MetricStat> metrics;  // e_r_deg, e_t, e_tn, e_c, then e_r_sym_deg / e_c_sym / e_k_hat if present
  double proportion_rejected = 0.0;
  std::size_t count = 0;

  const MetricStat* find(const std::string& name) const;
};

/// Median with the mean-of-central-pair rule for even sizes. Throws EmptyDataset.
double median(std::vector<double> values);
double mean(std::span<const double> values);

struct SummaryPair {
  EvalSummary all;
  EvalSummary accepted;
};

/// Statistics over every report and over the accepted subset. Throws EmptyDataset for no reports
/// and DimensionMismatch for unequal lengths. An empty accepted subset yields count 0 and no metrics.
SummaryPair aggregate(std::span<const ErrorReport> reports, const std::vector<bool>& rejected);

}  // namespace orbitpose
