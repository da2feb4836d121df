#include "synckit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

namespace synckit {

const char* to_string(EventPhase p) {
    switch (p) {
        case EventPhase::in_phase: return "in_phase";
        case EventPhase::anti_phase: return "anti_phase";
        case EventPhase::mixed: return "mixed";
    }
    return "in_phase";
}

const char* to_string(EventTrigger t) {
    switch (t) {
        case EventTrigger::r_mean: return "r_mean";
        case EventTrigger::l_pair: return "l_pair";
        case EventTrigger::both: return "both";
    }
    return "r_mean";
}

MetricsSeries compute_metrics(const PairCorrelations& pc, double z) {
    if (!(z > 0.0 && z < 1.0))
        throw config_error("correlation threshold z must be in (0, 1), got " + format_double(z));
    MetricsSeries m;
    m.t_synch = pc.t_synch;
    m.z = z;
    m.index_offset = static_cast<std::size_t>(pc.t_synch) - 1;
    const std::size_t n = pc.n_positions;
    m.r_mean.assign(n, kMissing);
    m.l_pair_signed.assign(n, kMissing);
    m.l_pair_abs.assign(n, kMissing);
    m.defined_pairs.assign(n, 0);

    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0;
        std::size_t defined = 0, above_signed = 0, above_abs = 0;
        for (const auto& series : pc.r) {
            double r = series[k];
            if (is_missing(r)) continue;
            ++defined;
            sum += r;
            if (r > z) ++above_signed;
            if (std::abs(r) > z) ++above_abs;
        }
        if (defined == 0) continue;  // all pairs undefined: metrics stay undefined
        m.defined_pairs[k] = static_cast<std::uint16_t>(defined);
        m.r_mean[k] = sum / static_cast<double>(defined);
        m.l_pair_signed[k] = static_cast<double>(above_signed) / static_cast<double>(defined);
        m.l_pair_abs[k] = static_cast<double>(above_abs) / static_cast<double>(defined);
    }
    return m;
}

std::vector<SyncEvent> detect_events(const MetricsSeries& m, const EventConfig& cfg) {
    if (!(cfg.z > 0.0 && cfg.z < 1.0))
        throw config_error("event threshold z must be in (0, 1)");
    if (!(cfg.l_thresh > 0.0 && cfg.l_thresh <= 1.0))
        throw config_error("l_pair threshold must be in (0, 1]");
    if (cfg.min_gap < 0) throw config_error("min_gap must be >= 0");

    const std::size_t n = m.size();
    auto qualifies = [&](std::size_t k) {
        return (!is_missing(m.r_mean[k]) && m.r_mean[k] >= cfg.z) ||
               (!is_missing(m.l_pair_abs[k]) && m.l_pair_abs[k] >= cfg.l_thresh);
    };

    // maximal qualifying runs, merged when closer than min_gap
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // [begin, end)
    std::size_t k = 0;
    while (k < n) {
        if (!qualifies(k)) {
            ++k;
            continue;
        }
        std::size_t begin = k;
        while (k < n && qualifies(k)) ++k;
        if (!runs.empty() && begin - runs.back().second < static_cast<std::size_t>(cfg.min_gap))
            runs.back().second = k;
        else
            runs.emplace_back(begin, k);
    }

    std::vector<SyncEvent> events;
    events.reserve(runs.size());
    for (const auto& [begin, end] : runs) {
        SyncEvent e;
        e.t_synch = m.t_synch;
        e.start = begin + m.index_offset;
        e.end = end + m.index_offset;
        bool r_fired = false, l_fired = false;
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_k = begin;
        for (std::size_t i = begin; i < end; ++i) {
            double rm = m.r_mean[i], la = m.l_pair_abs[i], ls = m.l_pair_signed[i];
            if (!is_missing(rm)) {
                e.peak_r_mean = std::max(e.peak_r_mean, rm);
                if (rm >= cfg.z) r_fired = true;
            }
            if (!is_missing(la)) {
                e.peak_l_pair_abs = std::max(e.peak_l_pair_abs, la);
                if (la >= cfg.l_thresh) l_fired = true;
            }
            if (!is_missing(ls)) e.peak_l_pair_signed = std::max(e.peak_l_pair_signed, ls);
            double score = std::max(is_missing(rm) ? -2.0 : rm, is_missing(la) ? -2.0 : la);
            if (score > best) {
                best = score;
                best_k = i;
            }
        }
        e.peak_index = best_k + m.index_offset;
        e.trigger = r_fired && l_fired ? EventTrigger::both
                    : r_fired          ? EventTrigger::r_mean
                                       : EventTrigger::l_pair;
        double la = m.l_pair_abs[best_k], ls = m.l_pair_signed[best_k], rm = m.r_mean[best_k];
        if (!is_missing(la) && !is_missing(ls) && la > ls + 1e-12)
            e.phase = (!is_missing(rm) && rm >= cfg.z) ? EventPhase::mixed : EventPhase::anti_phase;
        else
            e.phase = EventPhase::in_phase;
        e.low_confidence = end - begin < static_cast<std::size_t>(cfg.low_confidence_len);
        events.push_back(std::move(e));
    }
    return events;
}

void annotate_event(SyncEvent& event, const CorrelationFrame& peak_frame, double z) {
    std::set<int> cells;
    for (int i = 0; i < peak_frame.p; ++i)
        for (int j = i + 1; j < peak_frame.p; ++j) {
            double r = peak_frame.at(i, j);
            if (!is_missing(r) && std::abs(r) > z) {
                cells.insert(i);
                cells.insert(j);
            }
        }
    event.involved_cells.assign(cells.begin(), cells.end());
}

std::vector<SyncEvent> detect_events(const PairCorrelations& pc, const MetricsSeries& m,
                                     const EventConfig& cfg) {
    auto events = detect_events(m, cfg);
    for (auto& e : events) {
        std::size_t position = e.peak_index - m.index_offset;
        std::set<int> cells;
        for (std::size_t k = 0; k < pc.pairs.size(); ++k) {
            double r = pc.r[k][position];
            if (!is_missing(r) && std::abs(r) > cfg.z) {
                cells.insert(pc.pairs[k].i);
                cells.insert(pc.pairs[k].j);
            }
        }
        e.involved_cells.assign(cells.begin(), cells.end());
    }
    return events;
}

void RateReport::merge(const RateReport& other) {
    if (r_thresholds != other.r_thresholds || l_thresholds != other.l_thresholds)
        throw config_error("cannot merge rate reports with different criteria");
    t_exp += other.t_exp;
    total_positions += other.total_positions;
    for (std::size_t i = 0; i < r_mean_cells.size(); ++i)
        r_mean_cells[i].n_smp += other.r_mean_cells[i].n_smp;
    for (std::size_t i = 0; i < l_thresholds.size(); ++i) {
        l_signed[i].n_smp += other.l_signed[i].n_smp;
        l_abs[i].n_smp += other.l_abs[i].n_smp;
    }
    auto rerate = [&](RateCell& c) { c.rate = t_exp > 0 ? static_cast<double>(c.n_smp) / t_exp : 0.0; };
    for (auto& c : r_mean_cells) rerate(c);
    for (auto& c : l_signed) rerate(c);
    for (auto& c : l_abs) rerate(c);
}

RateReport event_rate(const MetricsSeries& m, double t_exp, std::vector<double> r_thresholds) {
    if (!(t_exp > 0)) throw config_error("t_exp must be > 0");
    RateReport rep;
    rep.t_exp = t_exp;
    rep.r_thresholds = std::move(r_thresholds);
    rep.r_mean_cells.assign(rep.r_thresholds.size(), {});
    for (std::size_t k = 0; k < m.size(); ++k) {
        double rm = m.r_mean[k];
        if (!is_missing(rm)) {
            ++rep.total_positions;
            for (std::size_t t = 0; t < rep.r_thresholds.size(); ++t)
                if (rm > rep.r_thresholds[t]) ++rep.r_mean_cells[t].n_smp;
        }
        double ls = m.l_pair_signed[k], la = m.l_pair_abs[k];
        for (std::size_t t = 0; t < rep.l_thresholds.size(); ++t) {
            if (!is_missing(ls) && ls > rep.l_thresholds[t]) ++rep.l_signed[t].n_smp;
            if (!is_missing(la) && la > rep.l_thresholds[t]) ++rep.l_abs[t].n_smp;
        }
    }
    for (auto& c : rep.r_mean_cells) c.rate = static_cast<double>(c.n_smp) / t_exp;
    for (auto& c : rep.l_signed) c.rate = static_cast<double>(c.n_smp) / t_exp;
    for (auto& c : rep.l_abs) c.rate = static_cast<double>(c.n_smp) / t_exp;
    return rep;
}

WindowScan scan_window(const std::vector<std::span<const double>>& residuals, int window_min,
                       int window_max, int step, int threads) {
    if (residuals.size() < 2) throw config_error("window scan needs at least 2 channels");
    const std::size_t n = residuals[0].size();
    if (window_min < 2 || window_max < window_min || step < 1)
        throw config_error("invalid scan range [" + std::to_string(window_min) + ", " +
                           std::to_string(window_max) + "] step " + std::to_string(step));
    if (static_cast<std::size_t>(window_max) > n / 2)
        throw config_error("scan window max " + std::to_string(window_max) +
                           " exceeds half the series length");

    WindowScan scan;
    std::vector<int> windows;
    for (int w = window_min; w <= window_max; w += step) windows.push_back(w);
    scan.curve.resize(windows.size());
    parallel_for(windows.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            PairCorrelations pc = rolling_pairs(residuals, windows[k], 1);
            MetricsSeries m = compute_metrics(pc, 0.7);
            double peak = -std::numeric_limits<double>::infinity();
            for (double v : m.r_mean)
                if (!is_missing(v)) peak = std::max(peak, v);
            scan.curve[k] = {windows[k], peak};
        }
    });
    scan.best_t_synch = scan.curve.front().first;
    scan.best_peak_r_mean = scan.curve.front().second;
    for (const auto& [w, peak] : scan.curve)
        if (peak > scan.best_peak_r_mean) {
            scan.best_peak_r_mean = peak;
            scan.best_t_synch = w;
        }
    return scan;
}

SubsetSeries subset_ratio(const PairCorrelations& pc, double z, PairMode mode) {
    if (!(z > 0.0 && z < 1.0)) throw config_error("subset threshold z must be in (0, 1)");
    SubsetSeries s;
    s.z = z;
    s.mode = mode;
    s.index_offset = static_cast<std::size_t>(pc.t_synch) - 1;
    const std::size_t n = pc.n_positions;
    s.n_pairs.assign(n, 0);
    s.n_cells.assign(n, 0);
    s.ratio.assign(n, 0.0);
    std::vector<char> involved(static_cast<std::size_t>(pc.n_channels));
    for (std::size_t k = 0; k < n; ++k) {
        std::fill(involved.begin(), involved.end(), 0);
        std::uint32_t pairs = 0;
        for (std::size_t q = 0; q < pc.pairs.size(); ++q) {
            double r = pc.r[q][k];
            if (is_missing(r)) continue;
            bool hit = mode == PairMode::signed_r ? r > z : std::abs(r) > z;
            if (hit) {
                ++pairs;
                involved[static_cast<std::size_t>(pc.pairs[q].i)] = 1;
                involved[static_cast<std::size_t>(pc.pairs[q].j)] = 1;
            }
        }
        std::uint32_t cells = 0;
        for (char c : involved) cells += static_cast<std::uint32_t>(c);
        s.n_pairs[k] = pairs;
        s.n_cells[k] = cells;
        s.ratio[k] = cells ? static_cast<double>(pairs) / static_cast<double>(cells) : 0.0;
    }
    return s;
}

namespace {

// Iterative radix-2 FFT, length must be a power of two. Window sizes here
// are small (256 by default) so this stays cheap.
void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        std::complex<double> wn = std::polar(1.0, angle);
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wn;
            }
        }
    }
}

// Share of the window's one-sided power carried by the strongest bin and its
// two neighbours (Hann main lobe), DC excluded.
double dominant_peak_fraction(std::span<const double> window) {
    const std::size_t n = window.size();
    double mean = 0;
    for (double v : window) mean += v;
    mean /= static_cast<double>(n);
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) {
        double hann =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1)));
        buf[i] = {(window[i] - mean) * hann, 0.0};
    }
    fft_inplace(buf);
    const std::size_t half = n / 2;
    std::vector<double> power(half + 1, 0.0);
    double total = 0;
    for (std::size_t k = 1; k <= half; ++k) {
        power[k] = std::norm(buf[k]);
        total += power[k];
    }
    if (total <= 0) return 0.0;
    std::size_t peak = 1;
    for (std::size_t k = 2; k <= half; ++k)
        if (power[k] > power[peak]) peak = k;
    double cluster = power[peak];
    if (peak > 1) cluster += power[peak - 1];
    if (peak < half) cluster += power[peak + 1];
    return cluster / total;
}

}  // namespace

std::pair<std::vector<char>, SelfOscDiagnostics> reject_self_oscillation(
    std::span<const double> residual, const SelfOscConfig& cfg) {
    if (cfg.spectral_window < 8 || (cfg.spectral_window & (cfg.spectral_window - 1)) != 0)
        throw config_error("spectral window must be a power of two >= 8");
    if (cfg.hop < 1) throw config_error("hop must be >= 1");

    const std::size_t n = residual.size();
    const auto w = static_cast<std::size_t>(cfg.spectral_window);
    std::vector<char> mask(n, 0);
    SelfOscDiagnostics diag;
    if (n < w) return {mask, diag};

    struct WindowStat {
        std::size_t begin;
        double rms;
        bool valid;
    };
    std::vector<WindowStat> stats;
    for (std::size_t begin = 0; begin + w <= n; begin += static_cast<std::size_t>(cfg.hop)) {
        double sum = 0, sum2 = 0;
        std::size_t finite = 0;
        for (std::size_t i = begin; i < begin + w; ++i) {
            if (is_missing(residual[i])) continue;
            sum += residual[i];
            sum2 += residual[i] * residual[i];
            ++finite;
        }
        bool valid = finite == w;  // gapped windows are already excluded downstream
        double rms = 0;
        if (valid) {
            double mean = sum / static_cast<double>(w);
            double var = sum2 / static_cast<double>(w) - mean * mean;
            rms = var > 0 ? std::sqrt(var) : 0.0;
        }
        stats.push_back({begin, rms, valid});
    }

    std::vector<double> rms_values;
    for (const auto& s : stats)
        if (s.valid) rms_values.push_back(s.rms);
    if (rms_values.empty()) return {mask, diag};
    std::nth_element(rms_values.begin(), rms_values.begin() + rms_values.size() / 2,
                     rms_values.end());
    diag.median_rms = rms_values[rms_values.size() / 2];

    for (const auto& s : stats) {
        if (!s.valid || s.rms <= cfg.amp_factor * diag.median_rms) continue;
        if (dominant_peak_fraction(residual.subspan(s.begin, w)) <= cfg.peak_frac) continue;
        ++diag.windows_flagged;
        for (std::size_t i = s.begin; i < s.begin + w; ++i) mask[i] = 1;
    }
    for (char m : mask) diag.masked_samples += static_cast<std::size_t>(m);
    return {mask, diag};
}

GroupCorrelations group_correlations(const std::vector<std::span<const double>>& impedance,
                                     const std::vector<std::span<const double>>& temperature,
                                     int t_synch, int threads) {
    if (impedance.empty() || temperature.empty())
        throw config_error("group correlations need both impedance and temperature channels");
    const std::size_t n = impedance[0].size();
    for (const auto& c : impedance)
        if (c.size() != n) throw input_error("group correlations: channel lengths differ");
    for (const auto& c : temperature)
        if (c.size() != n) throw input_error("group correlations: channel lengths differ");
    if (n < static_cast<std::size_t>(t_synch))
        throw config_error("series shorter than rolling window");

    GroupCorrelations g;
    g.index_offset = static_cast<std::size_t>(t_synch) - 1;
    const std::size_t positions = n - static_cast<std::size_t>(t_synch) + 1;

    struct Task {
        std::span<const double> a, b;
        int group;  // 0 imp-imp, 1 temp-temp, 2 cross
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < impedance.size(); ++i)
        for (std::size_t j = i + 1; j < impedance.size(); ++j)
            tasks.push_back({impedance[i], impedance[j], 0});
    for (std::size_t i = 0; i < temperature.size(); ++i)
        for (std::size_t j = i + 1; j < temperature.size(); ++j)
            tasks.push_back({temperature[i], temperature[j], 1});
    for (const auto& imp : impedance)
        for (const auto& temp : temperature) tasks.push_back({imp, temp, 2});
    g.n_imp_pairs = pair_count(impedance.size());
    g.n_temp_pairs = pair_count(temperature.size());
    g.n_cross_pairs = impedance.size() * temperature.size();

    std::vector<std::vector<double>> results(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            results[k] = rolling_pearson(tasks[k].a, tasks[k].b, t_synch);
    });

    auto reduce = [&](int group) {
        std::vector<double> mean(positions, kMissing);
        std::vector<std::uint32_t> count(positions, 0);
        std::vector<double> sum(positions, 0.0);
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            if (tasks[k].group != group) continue;
            for (std::size_t i = 0; i < positions; ++i) {
                double r = results[k][i];
                if (is_missing(r)) continue;
                sum[i] += r;
                ++count[i];
            }
        }
        for (std::size_t i = 0; i < positions; ++i)
            if (count[i]) mean[i] = sum[i] / static_cast<double>(count[i]);
        return mean;
    };
    g.imp_imp = reduce(0);
    g.temp_temp = reduce(1);
    g.imp_temp = reduce(2);
    return g;
}

ThermalBound thermal_impedance_bound(double reference_impedance_ohm, double a_per_degc,
                                     double d_temp_degc) {
    if (reference_impedance_ohm <= 0) throw config_error("reference impedance must be > 0");
    if (a_per_degc <= 0) throw config_error("temperature coefficient must be > 0");
    if (d_temp_degc < 0) throw config_error("temperature deviation must be >= 0");
    ThermalBound b;
    b.bound_ohm = reference_impedance_ohm * a_per_degc * d_temp_degc;
    b.a_in_range = a_per_degc >= 0.0191 && a_per_degc <= 0.025;
    return b;
}

}  // namespace synckit
