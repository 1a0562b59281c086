#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moeval/metrics.hpp"
#include "moeval/record.hpp"

namespace moeval::report {

// Table-1-style row for one (responder, environment, padding) slice: the
// N=4 / N=100 anchor cells plus the policy diagnostics at the largest N.
struct SummaryRow {
    std::string responder_id;
    std::string environment;
    std::string padding_key;

    std::optional<double> acc_4, acc_100;
    std::optional<double> na_4, na_100;
    std::optional<metrics::ConfidenceInterval> na_100_ci;  // trial-level
    std::optional<double> bubble;
    std::optional<metrics::ConfidenceInterval> bubble_ci;  // bootstrap over targets
    bool bubble_degenerate = false;
    std::optional<double> delta_pfi;   // at N=100
    std::optional<double> slope_100;
    std::optional<double> entropy;     // policy block, at the largest N present
    std::optional<double> front, tail, mean_pos, ks;
    std::optional<double> invalid_rate_100;
};

struct Report {
    std::vector<metrics::CellMetrics> cells;  // one per (responder, env, padding, N)
    std::vector<SummaryRow> summary;
};

Report build_report(const std::vector<TrialRecord>& records, const metrics::MetricsConfig& config);

struct ReportFiles {
    std::filesystem::path cells_csv;
    std::filesystem::path summary_csv;
    std::filesystem::path summary_md;
    std::filesystem::path padding_deltas_csv;  // only when padded cells exist
    std::filesystem::path padding_spread_csv;
    std::vector<std::filesystem::path> cdf_files;
};

// Renders report.cells/summary to CSV and Markdown plus one
// (position, resp_cdf, gold_cdf) dump per cell.
ReportFiles write_report(const Report& report, const std::filesystem::path& output_dir);

// Accuracy deltas per padding condition against the no-padding baseline and
// their range, per (responder, env, N); empty when the log has no padded cells.
struct PaddingDelta {
    std::string responder_id;
    std::string environment;
    int option_count = 0;
    std::string padding_key;
    double delta = 0.0;
};
struct PaddingSpreadRow {
    std::string responder_id;
    std::string environment;
    int option_count = 0;
    double spread = 0.0;
    int conditions = 0;
};
std::vector<PaddingDelta> padding_deltas(const Report& report);
std::vector<PaddingSpreadRow> padding_spreads(const Report& report);

}  // namespace moeval::report
