#include "orbitpose/report.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

namespace orbitpose {

namespace {

struct Row {
  const char* key;
  const char* label;
};

constexpr Row kPoseRows[] = {
    {"e_r_deg", "E_R (deg)"}, {"e_t", "E_T (meters)"}, {"e_tn", "E_TN"}, {"e_c", "E_C"},
    {"e_r_sym_deg", "E_R sym (deg)"}, {"e_c_sym", "E_C sym"}, {"e_k_hat", "E_k hat (px)"},
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_summary_csv(std::ostream& out, const CampaignResult& c) {
  out << "section,metric,median,mean\n";
  out << "detection,roi_accuracy,," << fmt(c.roi_accuracy) << '\n';
  out << "detection,iou," << fmt(c.iou_median) << ',' << fmt(c.iou_mean) << '\n';
  for (const auto& m : c.summary.all.metrics) out << "pose," << m.name << ',' << fmt(m.median) << ',' << fmt(m.mean) << '\n';
  out << "accepted,proportion_rejected,," << fmt(c.summary.accepted.proportion_rejected) << '\n';
  for (const auto& m : c.summary.accepted.metrics) {
    out << "accepted," << m.name << ',' << fmt(m.median) << ',' << fmt(m.mean) << '\n';
  }
}

std::string format_summary_table(const CampaignResult& c) {
  std::ostringstream os;
  char line[160];
  auto row = [&](const char* section, const char* metric, const std::string& med, const std::string& mean) {
    std::snprintf(line, sizeof line, "%-34s | %-20s | %-12s | %-12s\n", section, metric, med.c_str(), mean.c_str());
    os << line;
  };
  auto pose_block = [&](const char* section, const EvalSummary& s) {
    bool first = true;
    for (const auto& r : kPoseRows) {
      if (const auto* m = s.find(r.key)) {
        row(first ? section : "", r.label, fmt(m->median), fmt(m->mean));
        first = false;
      }
    }
  };
  row("", "Metric", "Median", "Mean");
  os << std::string(88, '-') << '\n';
  row("Object Detection Metrics", "RoI Accuracy", "-", fmt(c.roi_accuracy));
  row("", "IoU", fmt(c.iou_median), fmt(c.iou_mean));
  os << std::string(88, '-') << '\n';
  pose_block("Pose Metrics", c.summary.all);
  os << std::string(88, '-') << '\n';
  const std::string header = "Rejected Estimates (E_k hat > " + fmt(c.gate_threshold) + ")";
  row(header.c_str(), "Proportion Rejected", "-", fmt(c.summary.accepted.proportion_rejected));
  pose_block("Removed", c.summary.accepted);
  os << std::string(88, '-') << '\n';
  std::snprintf(line, sizeof line, "records %zu | posed %zu | non-detections: detector %zu, ransac %zu, gate %zu\n",
                c.results.size(), c.summary.all.count, c.detector_failures, c.ransac_failures, c.gate_rejections);
  os << line;
  return os.str();
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,accepted,rejected\n";
  for (std::size_t b = 0; b < h.bins(); ++b) {
    out << fmt(h.edges[b]) << ',' << fmt(h.edges[b + 1]) << ',' << h.accepted[b] << ',' << h.rejected[b] << '\n';
  }
}

void write_histogram_svg(std::ostream& out, const Histogram& h, const std::string& title, const std::string& x_label) {
  constexpr double kW = 640, kH = 360, kLeft = 50, kRight = 20, kTop = 36, kBottom = 46;
  std::size_t peak = 1;
  for (std::size_t b = 0; b < h.bins(); ++b) peak = std::max(peak, h.accepted[b] + h.rejected[b]);
  const double plot_w = kW - kLeft - kRight, plot_h = kH - kTop - kBottom;
  const double bar_w = plot_w / static_cast<double>(h.bins());

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";
  for (std::size_t b = 0; b < h.bins(); ++b) {
    const double x = kLeft + b * bar_w;
    const double ha = plot_h * static_cast<double>(h.accepted[b]) / static_cast<double>(peak);
    const double hr = plot_h * static_cast<double>(h.rejected[b]) / static_cast<double>(peak);
    const double base = kTop + plot_h;
    out << "<rect x=\"" << x << "\" y=\"" << base - ha << "\" width=\"" << bar_w - 1 << "\" height=\"" << ha
        << "\" fill=\"#4472c4\"/>\n";
    out << "<rect x=\"" << x << "\" y=\"" << base - ha - hr << "\" width=\"" << bar_w - 1 << "\" height=\"" << hr
        << "\" fill=\"#e06666\"/>\n";
  }
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kW - kRight << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"" << kH - 26 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(h.edges.front()) << "</text>\n";
  out << "<text x=\"" << kW - kRight << "\" y=\"" << kH - 26
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(h.edges.back()) << "+</text>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
      << " (blue: accepted, red: rejected)</text>\n";
  out << "<text x=\"8\" y=\"" << kTop + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">" << peak << "</text>\n";
  out << "</svg>\n";
}

void write_records_csv(std::ostream& out, const CampaignResult& c) {
  out << "id,outcome,detail,flipped,pure_outlier,iou,roi_contains,e_r_deg,e_t,e_tn,e_c,e_r_sym_deg,e_k,e_k_hat\n";
  for (const auto& r : c.results) {
    out << r.record_id << ',' << to_string(r.reason) << ',' << r.detail << ',' << r.trace.flipped << ','
        << r.trace.pure_outlier << ',' << fmt(r.iou) << ',' << r.roi_contains_gt << ',';
    if (r.report) {
      const auto& e = *r.report;
      out << fmt(e.e_r_deg()) << ',' << fmt(e.e_t) << ',' << fmt(e.e_tn) << ',' << fmt(e.e_c) << ','
          << (e.e_r_sym ? fmt(*e.e_r_sym * 180.0 / std::numbers::pi) : "") << ','
          << (e.e_k ? fmt(*e.e_k) : "") << ',' << (e.e_k_hat ? fmt(*e.e_k_hat) : "");
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

void write_timings_csv(std::ostream& out, const StageTimings& t) {
  out << "stage,mean_ms,median_ms\n";
  for (const auto& s : t.stages) out << s.stage << ',' << fmt(s.mean_ms) << ',' << fmt(s.median_ms) << '\n';
  out << "frames," << t.frames << ",\n";
  out << "effective_hz," << fmt(t.effective_hz) << ",\n";
}

std::string format_timings_table(const StageTimings& t) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%-14s %12s %12s\n", "stage (ms)", "mean", "median");
  os << line;
  for (const auto& s : t.stages) {
    std::snprintf(line, sizeof line, "%-14s %12.4f %12.4f\n", s.stage.c_str(), s.mean_ms, s.median_ms);
    os << line;
  }
  std::snprintf(line, sizeof line, "frames %zu, effective rate %.1f Hz (detector and keypoint CNNs not included)\n",
                t.frames, t.effective_hz);
  os << line;
  return os.str();
}

}  // namespace orbitpose
