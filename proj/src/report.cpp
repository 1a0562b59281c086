#include "moeval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "moeval/errors.hpp"

namespace moeval::report {

namespace {

std::string fmt(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string opt_fmt(const std::optional<double>& v, int digits = 6) {
    return v ? fmt(*v, digits) : std::string();
}

std::string ci_fmt(const std::optional<metrics::ConfidenceInterval>& ci, int digits = 4) {
    if (!ci) return {};
    return "[" + fmt(ci->lo, digits) + ", " + fmt(ci->hi, digits) + "]";
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c == '/' || c == ':' || c == ' ' || c == '|') c = '-';
    }
    return out;
}

}  // namespace

Report build_report(const std::vector<TrialRecord>& records, const metrics::MetricsConfig& config) {
    if (records.empty()) throw AggregationError("cannot build a report from zero records");

    // (responder, env, padding) -> N -> records
    std::map<std::tuple<std::string, std::string, std::string>,
             std::map<int, std::vector<TrialRecord>>>
        slices;
    for (const auto& r : records) {
        slices[{r.responder_id, r.environment, r.padding_key}][r.option_count].push_back(r);
    }

    Report out;
    for (const auto& [slice_key, by_n] : slices) {
        const auto& [responder, env, padding] = slice_key;
        SummaryRow row;
        row.responder_id = responder;
        row.environment = env;
        row.padding_key = padding;

        std::vector<metrics::CellMetrics> slice_cells;
        slice_cells.reserve(by_n.size());
        for (const auto& [n, cell_records] : by_n) {
            slice_cells.push_back(metrics::compute_cell(cell_records, config));
        }
        const metrics::CellMetrics* cell_4 = nullptr;
        const metrics::CellMetrics* cell_100 = nullptr;
        const metrics::CellMetrics* cell_max = nullptr;
        for (const auto& cell : slice_cells) {
            if (cell.option_count == 4) cell_4 = &cell;
            if (cell.option_count == 100) cell_100 = &cell;
            if (!cell_max || cell.option_count > cell_max->option_count) cell_max = &cell;
        }
        if (cell_4) {
            row.acc_4 = cell_4->accuracy;
            row.na_4 = cell_4->na;
        }
        if (cell_100) {
            row.acc_100 = cell_100->accuracy;
            row.na_100 = cell_100->na;
            row.na_100_ci = cell_100->na_trial_ci;
            row.delta_pfi = cell_100->delta_pfi;
            if (cell_100->slope) row.slope_100 = cell_100->slope->slope;
            row.invalid_rate_100 = cell_100->invalid_rate;
        }
        if (cell_4 && cell_100) {
            row.bubble = metrics::bubble_index(cell_100->na, cell_4->na, config.epsilon);
            row.bubble_degenerate = metrics::bubble_degenerate(cell_4->na);
            try {
                row.bubble_ci = metrics::bootstrap_bubble_ci(cell_4->per_target,
                                                             cell_100->per_target, 4, 100, config);
            } catch (const SampleSizeError&) {
                // single-target slices get no bootstrap interval
            }
        }
        if (cell_max) {
            row.entropy = cell_max->entropy;
            row.front = cell_max->front;
            row.tail = cell_max->tail;
            row.mean_pos = cell_max->mean_pos;
            row.ks = cell_max->ks;
        }
        out.summary.push_back(std::move(row));
        for (auto& cell : slice_cells) out.cells.push_back(std::move(cell));
    }

    std::sort(out.cells.begin(), out.cells.end(), [](const auto& a, const auto& b) {
        return std::tie(a.responder_id, a.environment, a.padding_key, a.option_count) <
               std::tie(b.responder_id, b.environment, b.padding_key, b.option_count);
    });
    return out;
}

std::vector<PaddingDelta> padding_deltas(const Report& report) {
    // (responder, env, N) -> padding -> accuracy
    std::map<std::tuple<std::string, std::string, int>, std::map<std::string, double>> acc;
    for (const auto& cell : report.cells) {
        acc[{cell.responder_id, cell.environment, cell.option_count}][cell.padding_key] =
            cell.accuracy;
    }
    std::vector<PaddingDelta> out;
    for (const auto& [key, by_padding] : acc) {
        const auto base = by_padding.find("none");
        if (base == by_padding.end() || by_padding.size() < 2) continue;
        for (const auto& [padding, a] : by_padding) {
            if (padding == "none") continue;
            out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), padding,
                           a - base->second});
        }
    }
    return out;
}

std::vector<PaddingSpreadRow> padding_spreads(const Report& report) {
    std::map<std::tuple<std::string, std::string, int>, std::vector<double>> deltas;
    for (const auto& d : padding_deltas(report)) {
        deltas[{d.responder_id, d.environment, d.option_count}].push_back(d.delta);
    }
    std::vector<PaddingSpreadRow> out;
    for (const auto& [key, values] : deltas) {
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                       metrics::padding_spread(values), static_cast<int>(values.size())});
    }
    return out;
}

ReportFiles write_report(const Report& report, const std::filesystem::path& output_dir) {
    std::filesystem::create_directories(output_dir);
    ReportFiles files;

    files.cells_csv = output_dir / "cells.csv";
    {
        std::ofstream out(files.cells_csv, std::ios::binary | std::ios::trunc);
        out << "responder,env,padding,N,trials,valid,invalid_rate,acc,na,"
               "acc_ci_lo,acc_ci_hi,na_ci_lo,na_ci_hi,"
               "acc_target_ci_lo,acc_target_ci_hi,na_target_ci_lo,na_target_ci_hi,"
               "pfi,delta_pfi,entropy,front,tail,mean_pos,ks,slope,intercept,"
               "k_pre,bins\n";
        for (const auto& c : report.cells) {
            out << c.responder_id << ',' << c.environment << ',' << c.padding_key << ','
                << c.option_count << ',' << c.trial_count << ',' << c.valid_count << ','
                << fmt(c.invalid_rate) << ',' << fmt(c.accuracy) << ',' << fmt(c.na) << ','
                << fmt(c.accuracy_trial_ci.lo) << ',' << fmt(c.accuracy_trial_ci.hi) << ','
                << fmt(c.na_trial_ci.lo) << ',' << fmt(c.na_trial_ci.hi) << ','
                << (c.accuracy_target_ci ? fmt(c.accuracy_target_ci->lo) : std::string()) << ','
                << (c.accuracy_target_ci ? fmt(c.accuracy_target_ci->hi) : std::string()) << ','
                << (c.na_target_ci ? fmt(c.na_target_ci->lo) : std::string()) << ','
                << (c.na_target_ci ? fmt(c.na_target_ci->hi) : std::string()) << ','
                << opt_fmt(c.pfi) << ',' << opt_fmt(c.delta_pfi) << ',' << opt_fmt(c.entropy)
                << ',' << opt_fmt(c.front) << ',' << opt_fmt(c.tail) << ',' << opt_fmt(c.mean_pos)
                << ',' << opt_fmt(c.ks) << ','
                << (c.slope ? fmt(c.slope->slope) : std::string()) << ','
                << (c.slope ? fmt(c.slope->intercept) : std::string()) << ',' << c.k_pre_used
                << ',' << c.bin_count_used << '\n';
        }
    }

    files.summary_csv = output_dir / "summary.csv";
    {
        std::ofstream out(files.summary_csv, std::ios::binary | std::ios::trunc);
        out << "responder,env,padding,acc_4,acc_100,na_4,na_100,"
               "na_100_ci_lo,na_100_ci_hi,bi,bi_ci_lo,bi_ci_hi,bi_degenerate,"
               "delta_pfi_10,slope_100,entropy,front_20,tail_20,mean_pos,ks,invalid_rate_100\n";
        for (const auto& s : report.summary) {
            out << s.responder_id << ',' << s.environment << ',' << s.padding_key << ','
                << opt_fmt(s.acc_4) << ',' << opt_fmt(s.acc_100) << ',' << opt_fmt(s.na_4) << ','
                << opt_fmt(s.na_100) << ','
                << (s.na_100_ci ? fmt(s.na_100_ci->lo) : std::string()) << ','
                << (s.na_100_ci ? fmt(s.na_100_ci->hi) : std::string()) << ','
                << opt_fmt(s.bubble) << ','
                << (s.bubble_ci ? fmt(s.bubble_ci->lo) : std::string()) << ','
                << (s.bubble_ci ? fmt(s.bubble_ci->hi) : std::string()) << ','
                << (s.bubble_degenerate ? "1" : "0") << ',' << opt_fmt(s.delta_pfi) << ','
                << opt_fmt(s.slope_100) << ',' << opt_fmt(s.entropy) << ',' << opt_fmt(s.front)
                << ',' << opt_fmt(s.tail) << ',' << opt_fmt(s.mean_pos) << ',' << opt_fmt(s.ks)
                << ',' << opt_fmt(s.invalid_rate_100) << '\n';
        }
    }

    files.summary_md = output_dir / "summary.md";
    {
        std::ofstream out(files.summary_md, std::ios::binary | std::ios::trunc);
        out << "| Responder | Env | Padding | Acc_4 | Acc_100 | NA_4 | NA_100 | NA_100 95% CI | "
               "BI | BI 95% CI | dPFI | Slope_100 | Entropy | Front | Tail | MeanPos | KS |\n";
        out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& s : report.summary) {
            out << "| " << s.responder_id << " | " << s.environment << " | " << s.padding_key
                << " | " << opt_fmt(s.acc_4, 4) << " | " << opt_fmt(s.acc_100, 4) << " | "
                << opt_fmt(s.na_4, 4) << " | " << opt_fmt(s.na_100, 4) << " | "
                << ci_fmt(s.na_100_ci) << " | " << opt_fmt(s.bubble, 4)
                << (s.bubble_degenerate ? "*" : "") << " | " << ci_fmt(s.bubble_ci) << " | "
                << opt_fmt(s.delta_pfi, 4) << " | " << opt_fmt(s.slope_100, 4) << " | "
                << opt_fmt(s.entropy, 3) << " | " << opt_fmt(s.front, 3) << " | "
                << opt_fmt(s.tail, 3) << " | " << opt_fmt(s.mean_pos, 2) << " | "
                << opt_fmt(s.ks, 3) << " |\n";
        }
        out << "\n`*` marks a degenerate Bubble Index (NA_4 <= 0).\n";
    }

    const auto deltas = padding_deltas(report);
    if (!deltas.empty()) {
        files.padding_deltas_csv = output_dir / "padding_deltas.csv";
        std::ofstream out(files.padding_deltas_csv, std::ios::binary | std::ios::trunc);
        out << "responder,env,N,padding,delta\n";
        for (const auto& d : deltas) {
            out << d.responder_id << ',' << d.environment << ',' << d.option_count << ','
                << d.padding_key << ',' << fmt(d.delta) << '\n';
        }

        files.padding_spread_csv = output_dir / "padding_spread.csv";
        std::ofstream spread_out(files.padding_spread_csv, std::ios::binary | std::ios::trunc);
        spread_out << "responder,env,N,spread,conditions\n";
        for (const auto& s : padding_spreads(report)) {
            spread_out << s.responder_id << ',' << s.environment << ',' << s.option_count << ','
                       << fmt(s.spread) << ',' << s.conditions << '\n';
        }
    }

    for (const auto& cell : report.cells) {
        if (!cell.response_dist) continue;
        const std::string name = "cdf_" + sanitize(cell.responder_id) + "_" + cell.environment +
                                 "_" + sanitize(cell.padding_key) + "_" +
                                 std::to_string(cell.option_count) + ".csv";
        const auto path = output_dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "position,resp_cdf,gold_cdf\n";
        double resp_cdf = 0.0, gold_cdf = 0.0;
        for (int i = 0; i < cell.option_count; ++i) {
            resp_cdf += cell.response_dist->mass[static_cast<std::size_t>(i)];
            gold_cdf += cell.gold_dist.mass[static_cast<std::size_t>(i)];
            out << (i + 1) << ',' << fmt(resp_cdf) << ',' << fmt(gold_cdf) << '\n';
        }
        files.cdf_files.push_back(path);
    }
    return files;
}

}  // namespace moeval::report
