#include "synckit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "synckit/ingest.hpp"
#include "synckit/synccorr.hpp"

namespace synckit {

void DetectConfig::validate() const {
    if (detrend_order < 1 || detrend_order > 12)
        throw config_error("detrend order must be in [1, 12]");
    if (t_synch < 2) throw config_error("t_synch must be >= 2");
    if (frame_len != 0 && frame_len < static_cast<std::size_t>(2 * t_synch))
        throw config_error("frame length must be at least twice t_synch");
    if (!(z > 0.0 && z < 1.0))
        throw config_error("threshold z must be in (0, 1), got " + format_double(z));
    if (!(l_thresh > 0.0 && l_thresh <= 1.0))
        throw config_error("l_pair threshold must be in (0, 1]");
    if (min_gap < 0) throw config_error("min_gap must be >= 0");
    if (skip_hours < 0) throw config_error("skip hours must be >= 0");
    for (double t : r_rate_thresholds)
        if (!(t > 0.0 && t < 1.0)) throw config_error("rate thresholds must be in (0, 1)");
    if (filter_enabled) LowpassFilter probe(lowpass);  // validates cutoff/order
}

namespace {

struct Frame {
    std::size_t begin = 0, end = 0;
    std::size_t length() const { return end - begin; }
};

std::vector<Frame> make_frames(std::size_t n, std::size_t frame_len, std::size_t min_tail,
                               std::size_t* dropped_tail) {
    std::vector<Frame> frames;
    if (frame_len == 0 || frame_len >= n) {
        frames.push_back({0, n});
        return frames;
    }
    std::size_t begin = 0;
    while (begin + frame_len <= n) {
        frames.push_back({begin, begin + frame_len});
        begin += frame_len;
    }
    std::size_t tail = n - begin;
    if (tail >= min_tail)
        frames.push_back({begin, n});
    else
        *dropped_tail = tail;
    return frames;
}

}  // namespace

DetectResult run_detect(const Session& input, const DetectConfig& cfg) {
    cfg.validate();
    input.check();

    Session work = cfg.skip_hours > 0 ? reject_initial(input, cfg.skip_hours) : input;
    const std::size_t n = work.n_samples;
    const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();

    auto imp_idx = work.channels_of_kind(ChannelKind::impedance);
    auto temp_idx = work.channels_of_kind(ChannelKind::fluid_temp);
    if (imp_idx.size() < 2)
        throw input_error("detection needs at least 2 impedance channels, found " +
                          std::to_string(imp_idx.size()));
    if (n < static_cast<std::size_t>(2 * cfg.t_synch))
        throw input_error("session too short for rolling window " + std::to_string(cfg.t_synch));

    DetectResult result;
    result.config = cfg;
    result.n_samples = n;
    result.skipped_samples = input.n_samples - n;
    result.sample_period = work.sample_period;
    result.t0 = work.t0;
    result.t_exp = work.duration_seconds();
    for (auto i : imp_idx) result.impedance_ids.push_back(work.channels[i].id);
    for (auto i : temp_idx) result.temperature_ids.push_back(work.channels[i].id);

    const auto w = static_cast<std::size_t>(cfg.t_synch);
    const std::size_t min_tail =
        std::max<std::size_t>(2 * w, 3 * static_cast<std::size_t>(cfg.detrend_order + 1));
    std::vector<Frame> frames = make_frames(n, cfg.frame_len, min_tail, &result.dropped_tail_samples);

    // detrend + filter + self-oscillation masking, per channel per frame
    std::vector<std::size_t> analyzed = imp_idx;
    analyzed.insert(analyzed.end(), temp_idx.begin(), temp_idx.end());
    std::vector<std::vector<double>> res(analyzed.size());
    for (auto& r : res) r.assign(n, kMissing);

    std::mutex fit_mutex;
    std::size_t masked_total = 0;
    parallel_for(analyzed.size(), threads, [&](std::size_t c_begin, std::size_t c_end) {
        for (std::size_t c = c_begin; c < c_end; ++c) {
            const auto& channel = work.channels[analyzed[c]];

            // per-frame detrend into the channel's raw residual
            std::vector<double> raw(n, kMissing);
            std::vector<FrameFitInfo> infos;
            for (const Frame& frame : frames) {
                std::span<const double> slice(channel.values.data() + frame.begin, frame.length());
                std::size_t finite = 0;
                for (double v : slice)
                    if (std::isfinite(v)) ++finite;
                if (finite < static_cast<std::size_t>(3 * (cfg.detrend_order + 1)))
                    continue;  // frame unusable for this channel, stays missing

                FitResult fit = polyfit_lm(slice, cfg.detrend_order, cfg.lm);
                ResidualSeries resid = residual(slice, fit.model);
                std::copy(resid.values.begin(), resid.values.end(),
                          raw.begin() + static_cast<std::ptrdiff_t>(frame.begin));
                FrameFitInfo info;
                info.frame_start = frame.begin;
                info.channel_id = channel.id;
                info.report = fit.report;
                info.coefficients = fit.model.coeffs;
                infos.push_back(std::move(info));
            }

            // the rejection mask comes from the unfiltered residual: the
            // amp_factor threshold is calibrated against the raw noise floor,
            // and the whole-channel median is robust to long oscillations
            std::vector<char> mask;
            std::size_t masked = 0;
            bool is_impedance = c < imp_idx.size();
            if (cfg.self_osc_rejection && is_impedance) {
                auto [m, diag] = reject_self_oscillation(raw, cfg.self_osc);
                mask = std::move(m);
                masked = diag.masked_samples;
            }

            std::vector<double>& out = res[c];
            if (cfg.filter_enabled) {
                LowpassFilter filter(cfg.lowpass);
                for (const Frame& frame : frames) {
                    std::span<const double> slice(raw.data() + frame.begin, frame.length());
                    std::vector<double> filtered = filter.apply(slice);
                    std::copy(filtered.begin(), filtered.end(),
                              out.begin() + static_cast<std::ptrdiff_t>(frame.begin));
                }
            } else {
                out = raw;
            }
            if (!mask.empty())
                for (std::size_t i = 0; i < n; ++i)
                    if (mask[i]) out[i] = kMissing;

            std::lock_guard<std::mutex> lock(fit_mutex);
            masked_total += masked;
            for (auto& info : infos) result.fits.push_back(std::move(info));
        }
    });
    result.self_osc_masked = masked_total;
    // deterministic order regardless of thread interleaving
    std::sort(result.fits.begin(), result.fits.end(), [](const FrameFitInfo& a, const FrameFitInfo& b) {
        return a.frame_start != b.frame_start ? a.frame_start < b.frame_start
                                              : a.channel_id < b.channel_id;
    });

    // global metric series, assembled frame by frame
    MetricsSeries& gm = result.metrics;
    gm.t_synch = cfg.t_synch;
    gm.z = cfg.z;
    gm.index_offset = 0;
    gm.r_mean.assign(n, kMissing);
    gm.l_pair_signed.assign(n, kMissing);
    gm.l_pair_abs.assign(n, kMissing);
    gm.defined_pairs.assign(n, 0);

    auto init_subset = [&](SubsetSeries& s, PairMode mode) {
        s.z = cfg.z;
        s.mode = mode;
        s.index_offset = 0;
        s.n_pairs.assign(n, 0);
        s.n_cells.assign(n, 0);
        s.ratio.assign(n, 0.0);
    };
    init_subset(result.subset_signed, PairMode::signed_r);
    init_subset(result.subset_abs, PairMode::absolute_r);
    if (cfg.compute_multiway) result.multiway.assign(n, kMissing);

    result.has_groups = temp_idx.size() >= 2;
    if (result.has_groups) {
        result.groups.index_offset = 0;
        result.groups.imp_imp.assign(n, kMissing);
        result.groups.temp_temp.assign(n, kMissing);
        result.groups.imp_temp.assign(n, kMissing);
    }

    for (const Frame& frame : frames) {
        if (frame.length() < w) continue;
        std::vector<std::span<const double>> imp_spans;
        for (std::size_t c = 0; c < imp_idx.size(); ++c)
            imp_spans.emplace_back(res[c].data() + frame.begin, frame.length());

        PairCorrelations pc = rolling_pairs(imp_spans, cfg.t_synch, threads);
        MetricsSeries fm = compute_metrics(pc, cfg.z);
        SubsetSeries fs_signed = subset_ratio(pc, cfg.z, PairMode::signed_r);
        SubsetSeries fs_abs = subset_ratio(pc, cfg.z, PairMode::absolute_r);

        const std::size_t base = frame.begin + w - 1;
        for (std::size_t k = 0; k < fm.size(); ++k) {
            gm.r_mean[base + k] = fm.r_mean[k];
            gm.l_pair_signed[base + k] = fm.l_pair_signed[k];
            gm.l_pair_abs[base + k] = fm.l_pair_abs[k];
            gm.defined_pairs[base + k] = fm.defined_pairs[k];
            result.subset_signed.n_pairs[base + k] = fs_signed.n_pairs[k];
            result.subset_signed.n_cells[base + k] = fs_signed.n_cells[k];
            result.subset_signed.ratio[base + k] = fs_signed.ratio[k];
            result.subset_abs.n_pairs[base + k] = fs_abs.n_pairs[k];
            result.subset_abs.n_cells[base + k] = fs_abs.n_cells[k];
            result.subset_abs.ratio[base + k] = fs_abs.ratio[k];
        }

        if (cfg.compute_multiway) {
            const int p = pc.n_channels;
            parallel_for(fm.size(), threads, [&](std::size_t kb, std::size_t ke) {
                CorrelationFrame cf;
                cf.t_synch = cfg.t_synch;
                cf.p = p;
                for (std::size_t k = kb; k < ke; ++k) {
                    cf.time_index = base + k;
                    cf.r.assign(static_cast<std::size_t>(p) * p, 1.0);
                    for (std::size_t q = 0; q < pc.pairs.size(); ++q) {
                        double v = pc.r[q][k];
                        cf.r[static_cast<std::size_t>(pc.pairs[q].i) * p + pc.pairs[q].j] = v;
                        cf.r[static_cast<std::size_t>(pc.pairs[q].j) * p + pc.pairs[q].i] = v;
                    }
                    result.multiway[base + k] = multiway_coeff(cf);
                }
            });
        }

        if (result.has_groups) {
            std::vector<std::span<const double>> temp_spans;
            for (std::size_t c = 0; c < temp_idx.size(); ++c)
                temp_spans.emplace_back(res[imp_idx.size() + c].data() + frame.begin, frame.length());
            GroupCorrelations fg = group_correlations(imp_spans, temp_spans, cfg.t_synch, threads);
            result.groups.n_imp_pairs = fg.n_imp_pairs;
            result.groups.n_temp_pairs = fg.n_temp_pairs;
            result.groups.n_cross_pairs = fg.n_cross_pairs;
            for (std::size_t k = 0; k < fg.imp_imp.size(); ++k) {
                result.groups.imp_imp[base + k] = fg.imp_imp[k];
                result.groups.temp_temp[base + k] = fg.temp_temp[k];
                result.groups.imp_temp[base + k] = fg.imp_temp[k];
            }
        }
    }

    EventConfig ec;
    ec.z = cfg.z;
    ec.l_thresh = cfg.l_thresh;
    ec.min_gap = cfg.min_gap;
    result.events = detect_events(gm, ec);
    for (auto& e : result.events) {
        std::vector<std::span<const double>> imp_global;
        for (std::size_t c = 0; c < imp_idx.size(); ++c) imp_global.emplace_back(res[c]);
        CorrelationFrame peak = correlation_matrix(imp_global, cfg.t_synch, e.peak_index);
        annotate_event(e, peak, cfg.z);
    }

    result.rates = event_rate(gm, result.t_exp, cfg.r_rate_thresholds);
    return result;
}

}  // namespace synckit
