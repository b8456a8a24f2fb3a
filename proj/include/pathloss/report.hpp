#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pathloss/metrics.hpp"

namespace pathloss {

// report.csv: model,holdout_city,run,seed,count,rmse_db,mean_error_db,sd_error_db
// with shortest round-trip number formatting.
void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
/// Reads report rows back; per-link errors are left empty.
std::vector<EvalReport> read_report_csv(std::istream& in);

// errors.csv: model,link_id,error_db
void write_errors_csv(std::ostream& out, std::span<const EvalReport> reports);
/// Per-model errors in file order, one report per model in first-seen order.
std::vector<EvalReport> read_errors_csv(std::istream& in);

// hist.csv: bin_low_db,bin_high_db, then one count column per report. The
// first and last rows hold the underflow and overflow counts.
void write_histogram_csv(std::ostream& out, std::span<const EvalReport> reports);

/// Step plot of the per-report histograms overlaid on shared axes.
void write_histogram_svg(std::ostream& out, std::span<const EvalReport> reports);

/// Writes report.csv, errors.csv, hist.csv and hist.svg into `dir`, creating
/// it if needed. Throws EmptyInputError or IoError.
void export_report(std::span<const EvalReport> reports, const std::filesystem::path& dir);

}  // namespace pathloss
