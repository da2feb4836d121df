#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "synckit/synccorr.hpp"

namespace synckit {

// Signed counts r > z; absolute counts |r| > z and is the one that sees
// anti-phase synchronization.
enum class PairMode { signed_r, absolute_r };

// Per-index synchronization metrics over all channel pairs: the mean rolling
// correlation and the fraction of pairs above threshold (both modes).
// Undefined pairs are excluded from numerator and denominator alike.
struct MetricsSeries {
    int t_synch = 0;
    double z = 0.7;
    std::size_t index_offset = 0;  // sample index = position + index_offset
    std::vector<double> r_mean;
    std::vector<double> l_pair_signed;
    std::vector<double> l_pair_abs;
    std::vector<std::uint16_t> defined_pairs;

    std::size_t size() const { return r_mean.size(); }
};

MetricsSeries compute_metrics(const PairCorrelations& pc, double z);

enum class EventPhase { in_phase, anti_phase, mixed };
enum class EventTrigger { r_mean, l_pair, both };

const char* to_string(EventPhase p);
const char* to_string(EventTrigger t);

struct SyncEvent {
    std::size_t start = 0, end = 0;  // sample indices, half-open [start, end)
    std::size_t peak_index = 0;      // sample index of the strongest frame
    double peak_r_mean = 0.0;
    double peak_l_pair_signed = 0.0;
    double peak_l_pair_abs = 0.0;
    int t_synch = 0;
    std::vector<int> involved_cells;  // channels in qualifying pairs at the peak
    EventPhase phase = EventPhase::in_phase;
    EventTrigger trigger = EventTrigger::r_mean;
    bool low_confidence = false;  // shorter than the plausible event scale
};

struct EventConfig {
    double z = 0.7;
    double l_thresh = 0.9;  // "l_pair close to 1"
    int min_gap = 50;       // runs closer than this merge into one event
    int low_confidence_len = 30;
};

// Maximal runs where r_mean >= z or absolute-mode l_pair >= l_thresh, with
// nearby runs merged. Peak values and the phase label come from the
// strongest index of each run.
std::vector<SyncEvent> detect_events(const MetricsSeries& m, const EventConfig& cfg = {});

// Fills involved_cells from the qualifying pairs (|r| > z) of the peak frame.
void annotate_event(SyncEvent& event, const CorrelationFrame& peak_frame, double z);

// Convenience: detect and annotate from the pair series directly.
std::vector<SyncEvent> detect_events(const PairCorrelations& pc, const MetricsSeries& m,
                                     const EventConfig& cfg = {});

struct RateCell {
    std::size_t n_smp = 0;
    double rate = 0.0;  // per second
};

// Sample counts and rates per criterion in the control-table layout:
// r_mean thresholds plus l_pair > {0.9, 0.8, 0.7} in both modes.
struct RateReport {
    double t_exp = 0.0;  // seconds
    std::size_t total_positions = 0;
    std::vector<double> r_thresholds{0.7, 0.65};
    std::array<double, 3> l_thresholds{0.9, 0.8, 0.7};
    std::vector<RateCell> r_mean_cells;
    std::array<RateCell, 3> l_signed{};
    std::array<RateCell, 3> l_abs{};

    // Additive combination over disjoint session segments.
    void merge(const RateReport& other);
};

RateReport event_rate(const MetricsSeries& m, double t_exp,
                      std::vector<double> r_thresholds = {0.7, 0.65});

struct WindowScan {
    int best_t_synch = 0;
    double best_peak_r_mean = 0.0;
    std::vector<std::pair<int, double>> curve;  // (window, peak r_mean)
};

// Scans t_synch over [window_min, window_max] and returns the window
// maximizing the peak of r_mean, plus the full curve for plotting.
WindowScan scan_window(const std::vector<std::span<const double>>& residuals,
                       int window_min = 70, int window_max = 200, int step = 10,
                       int threads = 1);

// Qualifying-pair subset analysis: how many pairs pass the threshold and how
// many distinct cells they involve. ratio = N_pairs / N_cells is bounded by
// C(N_cells,2) / N_cells, i.e. 1.5, 2.5, 3.5, 4.5, ... at saturation.
struct SubsetSeries {
    double z = 0.7;
    PairMode mode = PairMode::absolute_r;
    std::size_t index_offset = 0;
    std::vector<std::uint32_t> n_pairs;
    std::vector<std::uint32_t> n_cells;
    std::vector<double> ratio;  // 0 when no pair qualifies
};

SubsetSeries subset_ratio(const PairCorrelations& pc, double z, PairMode mode);

struct SelfOscConfig {
    double amp_factor = 5.0;   // rolling RMS vs whole-frame median RMS
    double peak_frac = 0.6;    // dominant spectral peak share of window power
    int spectral_window = 256; // power of two
    int hop = 64;
};

struct SelfOscDiagnostics {
    std::size_t masked_samples = 0;
    std::size_t windows_flagged = 0;
    double median_rms = 0.0;
};

// Flags spans of large-amplitude stable-period self-oscillation: rolling RMS
// above amp_factor x the frame's median RMS AND a dominant spectral peak
// carrying more than peak_frac of the window's power. Masked spans are
// excluded from correlation analysis.
std::pair<std::vector<char>, SelfOscDiagnostics> reject_self_oscillation(
    std::span<const double> residual, const SelfOscConfig& cfg = {});

// Rolling means of the three correlation groups: impedance-impedance,
// temperature-temperature and impedance-temperature (all p x q cross pairs,
// including each cell's own temp-impedance pair).
struct GroupCorrelations {
    std::size_t index_offset = 0;
    std::vector<double> imp_imp, temp_temp, imp_temp;
    std::size_t n_imp_pairs = 0, n_temp_pairs = 0, n_cross_pairs = 0;
};

GroupCorrelations group_correlations(const std::vector<std::span<const double>>& impedance,
                                     const std::vector<std::span<const double>>& temperature,
                                     int t_synch, int threads = 1);

struct ThermalBound {
    double bound_ohm = 0.0;
    bool a_in_range = true;  // false flags a outside the tabulated 0.0191..0.025
};

// First-order bound on impedance change from a slow fluid-temperature drift:
// |dZ| <= Z * a * dT near 25 degC. Used to exclude temperature as the driver
// of the observed waves.
ThermalBound thermal_impedance_bound(double reference_impedance_ohm,
                                     double a_per_degc, double d_temp_degc);

}  // namespace synckit
