#pragma once

#include <string>
#include <vector>

#include "synckit/detrend.hpp"
#include "synckit/filtering.hpp"
#include "synckit/metrics.hpp"
#include "synckit/session.hpp"

namespace synckit {

// Full detection pipeline configuration: detrend -> filter -> rolling pair
// correlations -> metrics -> events.
struct DetectConfig {
    int detrend_order = 10;
    std::size_t frame_len = 2000;  // 0 = whole session as one frame
    bool filter_enabled = true;
    LowpassConfig lowpass{0.1, 2};
    int t_synch = 100;
    double z = 0.7;
    double l_thresh = 0.9;
    int min_gap = 50;
    double skip_hours = 0.0;  // initial rejection; CLI defaults this to 24
    bool self_osc_rejection = true;
    SelfOscConfig self_osc{};
    std::vector<double> r_rate_thresholds{0.7, 0.65};
    bool compute_multiway = false;
    int threads = 0;  // 0 = SYNC_THREADS or hardware concurrency
    LmConfig lm{};

    void validate() const;  // throws config_error
};

struct FrameFitInfo {
    std::size_t frame_start = 0;
    std::string channel_id;
    FitReport report;
    std::vector<double> coefficients;
};

struct DetectResult {
    DetectConfig config;
    std::size_t n_samples = 0;      // analyzed samples (after initial rejection)
    std::size_t skipped_samples = 0;
    double sample_period = 1.0;
    double t0 = 0.0;
    double t_exp = 0.0;  // seconds

    MetricsSeries metrics;  // global, index_offset 0, undefined = missing
    std::vector<double> multiway;  // filled only when requested
    std::vector<SyncEvent> events;
    RateReport rates;
    SubsetSeries subset_signed, subset_abs;
    bool has_groups = false;
    GroupCorrelations groups;

    std::vector<FrameFitInfo> fits;
    std::size_t self_osc_masked = 0;
    std::size_t dropped_tail_samples = 0;
    std::vector<std::string> impedance_ids;
    std::vector<std::string> temperature_ids;
};

DetectResult run_detect(const Session& input, const DetectConfig& cfg);

}  // namespace synckit
