#pragma once

#include <iosfwd>
#include <string>

#include "orbitpose/harness.hpp"

namespace orbitpose {

/// Columns: section,metric,median,mean. Sections: detection, pose, accepted.
void write_summary_csv(std::ostream& out, const CampaignResult& c);

/// Fixed-width table: detection rows, full-set pose rows, then the accepted-subset block with the
/// rejected proportion.
std::string format_summary_table(const CampaignResult& c);

/// Columns: bin_lo,bin_hi,accepted,rejected.
void write_histogram_csv(std::ostream& out, const Histogram& h);
void write_histogram_svg(std::ostream& out, const Histogram& h, const std::string& title, const std::string& x_label);

/// One row per record: id, outcome, flags, errors.
void write_records_csv(std::ostream& out, const CampaignResult& c);

/// Columns: stage,mean_ms,median_ms; followed by frames and effective_hz rows.
void write_timings_csv(std::ostream& out, const StageTimings& t);
std::string format_timings_table(const StageTimings& t);

}  // namespace orbitpose
