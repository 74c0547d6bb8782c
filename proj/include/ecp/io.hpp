#pragma once

#include <iosfwd>
#include <string>

#include "ecp/scan.hpp"

namespace ecp {

/// Single-column numeric CSV (optional header auto-detected); rejects
/// missing or non-numeric rows with the offending line number.
TimeSeries ingest_csv(const std::string& path, long min_length = 30);

void write_series_csv(const TimeSeries& X, const std::string& path,
                      const std::string& header = "x");

/// Long-form surface file with columns k1,k2,Q.
void write_heatmap(const ScanReport& report, const std::string& path);

/// Plain-text key-value scan report; regime standard errors come from
/// the per-segment sandwich F^{-1} G F^{-1} / Card(T).
void write_report(const ScanReport& report, ModelSpec model, long n, long stride,
                  double alpha, double wall_seconds, std::ostream& os);
void write_report_json(const ScanReport& report, ModelSpec model, long n, long stride,
                       double alpha, double wall_seconds, const std::string& path);

/// Sandwich standard errors for one fitted segment.
Vec sandwich_std_errors(const SegmentFit& f, long card);

} // namespace ecp
