#include "orbitpose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "orbitpose/error.hpp"

namespace orbitpose {

double ErrorReport::e_r_deg() const { return e_r * 180.0 / std::numbers::pi; }

SymmetryGroup SymmetryGroup::two_fold(const Vec3& axis) {
  SymmetryGroup g;
  g.rotations.push_back(Quaternion::from_axis_angle(axis, std::numbers::pi));
  return g;
}

double rotation_error(const Quaternion& q, const Quaternion& q_hat) {
  // Same angle as 2 acos(min(1, |q . q_hat|)), evaluated through the relative rotation so that
  // small angles keep full precision.
  const Quaternion r = q.conjugate() * q_hat;
  const double s = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
  return 2.0 * std::atan2(s, std::abs(r.w));
}

TranslationErrors translation_errors(const Vec3& t, const Vec3& t_hat) {
  const double range = t.norm();
  if (!(range > 0.0)) {
    throw Error(ErrorCode::kZeroGroundTruthRange, "ground-truth translation has zero length");
  }
  const double e_t = (t - t_hat).norm();
  return {e_t, e_t / range};
}

double combined_error(double e_r_rad, double e_tn) { return e_r_rad + e_tn; }

double symmetric_rotation_error(const Quaternion& q, const Quaternion& q_hat, const SymmetryGroup& sym) {
  double best = rotation_error(q, q_hat);
  for (const auto& s : sym.rotations) best = std::min(best, rotation_error(q * s, q_hat));
  return best;
}

ErrorReport evaluate_pose(const Pose& truth, const Pose& estimate, const SymmetryGroup* sym) {
  ErrorReport r;
  r.e_r = rotation_error(truth.rotation, estimate.rotation);
  const auto te = translation_errors(truth.translation, estimate.translation);
  r.e_t = te.e_t;
  r.e_tn = te.e_tn;
  r.e_c = combined_error(r.e_r, r.e_tn);
  if (sym) r.e_r_sym = symmetric_rotation_error(truth.rotation, estimate.rotation, *sym);
  return r;
}

const MetricStat* EvalSummary::find(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyDataset, "median of an empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / 2.0;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyDataset, "mean of an empty list");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

EvalSummary summarize(std::span<const ErrorReport> reports, const std::vector<bool>& rejected, bool accepted_only) {
  EvalSummary s;
  std::vector<const ErrorReport*> subset;
  std::size_t n_rejected = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    n_rejected += rejected[i];
    if (!accepted_only || !rejected[i]) subset.push_back(&reports[i]);
  }
  s.proportion_rejected = static_cast<double>(n_rejected) / static_cast<double>(reports.size());
  s.count = subset.size();
  if (subset.empty()) return s;

  auto add = [&](const std::string& name, auto getter) {
    std::vector<double> v;
    v.reserve(subset.size());
    for (const auto* r : subset) {
      const std::optional<double> x = getter(*r);
      if (!x) return;
      v.push_back(*x);
    }
    s.metrics.push_back({name, median(v), mean(v)});
  };
  constexpr double kDeg = 180.0 / std::numbers::pi;
  add("e_r_deg", [](const ErrorReport& r) { return std::optional<double>(r.e_r * kDeg); });
  add("e_t", [](const ErrorReport& r) { return std::optional<double>(r.e_t); });
  add("e_tn", [](const ErrorReport& r) { return std::optional<double>(r.e_tn); });
  add("e_c", [](const ErrorReport& r) { return std::optional<double>(r.e_c); });
  add("e_r_sym_deg", [](const ErrorReport& r) {
    return r.e_r_sym ? std::optional<double>(*r.e_r_sym * kDeg) : std::nullopt;
  });
  add("e_c_sym", [](const ErrorReport& r) {
    return r.e_r_sym ? std::optional<double>(combined_error(*r.e_r_sym, r.e_tn)) : std::nullopt;
  });
  add("e_k_hat", [](const ErrorReport& r) { return r.e_k_hat; });
  return s;
}

}  // namespace

SummaryPair aggregate(std::span<const ErrorReport> reports, const std::vector<bool>& rejected) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyDataset, "no reports to aggregate");
  if (reports.size() != rejected.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "reports and rejection flags differ in length");
  }
  return {summarize(reports, rejected, false), summarize(reports, rejected, true)};
}

}  // namespace orbitpose
