#pragma once

#include <string>
#include <vector>

#include "synckit/pipeline.hpp"

namespace synckit {

// Run artifacts. All files are deterministic for identical inputs and
// config; wall-clock metadata goes into a separate meta file.
void write_events_json(const DetectResult& r, const std::string& path);
void write_rates_csv(const DetectResult& r, const std::string& path);
void write_metrics_csv(const DetectResult& r, const std::string& path);
void write_subset_csv(const DetectResult& r, const std::string& path);
void write_groups_csv(const DetectResult& r, const std::string& path);
void write_report_json(const DetectResult& r, const std::string& path, bool dump_coeffs);

// Control-table style text: one column per criterion, rows per mode.
std::string rates_table_text(const DetectResult& r);

// Parsed back rate rows, for run comparison.
struct RateRow {
    std::string criterion;  // e.g. "r_mean>0.7"
    std::string mode;       // "signed" or "absolute"
    std::size_t n_smp = 0;
    double t_exp = 0.0;
    double rate = 0.0;
};
std::vector<RateRow> load_rates_csv(const std::string& path);

std::size_t count_events_json(const std::string& path);

struct CompareRow {
    std::string criterion;
    std::string mode;
    std::size_t n_a = 0, n_b = 0;
    double rate_a = 0.0, rate_b = 0.0;
    std::string ratio;  // "1", decimal, or "inf(B=0)"
};

struct CompareReport {
    std::vector<CompareRow> rows;
    std::size_t events_a = 0, events_b = 0;
    std::string event_ratio;
};

// Per-criterion rate ratios A/B between two completed runs.
CompareReport compare_runs(const std::string& run_dir_a, const std::string& run_dir_b);
std::string compare_table_text(const CompareReport& rep);
void write_compare_csv(const CompareReport& rep, const std::string& path);

}  // namespace synckit
