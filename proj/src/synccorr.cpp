#include "synckit/synccorr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace synckit {

std::vector<PairId> all_pairs(int n_channels) {
    std::vector<PairId> out;
    out.reserve(pair_count(static_cast<std::size_t>(n_channels)));
    for (int i = 0; i < n_channels; ++i)
        for (int j = i + 1; j < n_channels; ++j) out.push_back({i, j});
    return out;
}

namespace {

// A centered sum of squares below (1e-12 * mean)^2 per sample means the
// window's spread is quantization-level; its correlation is undefined.
constexpr double kVarianceFloor = 1e-24;

bool usable_variance(double denom, double sum) {
    return denom > kVarianceFloor * sum * sum && denom > 0.0;
}

double clamp_r(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw input_error("pearson: window lengths differ (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
    if (a.size() < 2) throw config_error("pearson needs windows of at least 2 samples");
    const std::size_t n = a.size();
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(a[i]) || is_missing(b[i])) return kMissing;
        sa += a[i];
        sb += b[i];
    }
    double ma = sa / static_cast<double>(n), mb = sb / static_cast<double>(n);
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    double w = static_cast<double>(n);
    if (!usable_variance(w * saa, sa) || !usable_variance(w * sbb, sb)) return kMissing;
    return clamp_r(sab / std::sqrt(saa * sbb));
}

std::vector<double> rolling_pearson(std::span<const double> a, std::span<const double> b,
                                    int window) {
    if (window < 2) throw config_error("rolling window must be >= 2");
    if (a.size() != b.size())
        throw input_error("rolling_pearson: series lengths differ");
    const std::size_t n = a.size();
    const auto w = static_cast<std::size_t>(window);
    if (n < w) throw config_error("series shorter than rolling window");

    std::vector<double> out(n - w + 1);

    long double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    std::size_t missing = 0;

    auto include = [&](std::size_t i) {
        if (is_missing(a[i]) || is_missing(b[i])) {
            ++missing;
            return;
        }
        long double x = a[i], y = b[i];
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    };
    auto exclude = [&](std::size_t i) {
        if (is_missing(a[i]) || is_missing(b[i])) {
            --missing;
            return;
        }
        long double x = a[i], y = b[i];
        sa -= x;
        sb -= y;
        saa -= x * x;
        sbb -= y * y;
        sab -= x * y;
    };
    auto recompute = [&](std::size_t begin) {
        sa = sb = saa = sbb = sab = 0;
        missing = 0;
        for (std::size_t i = begin; i < begin + w; ++i) include(i);
    };

    recompute(0);
    std::size_t steps_since_renorm = 0;
    const double wd = static_cast<double>(w);

    for (std::size_t k = 0;; ++k) {
        if (missing > 0) {
            out[k] = kMissing;
        } else {
            double dsa = static_cast<double>(sa), dsb = static_cast<double>(sb);
            double denom_a = static_cast<double>(wd * saa - sa * sa);
            double denom_b = static_cast<double>(wd * sbb - sb * sb);
            if (!usable_variance(denom_a, dsa) || !usable_variance(denom_b, dsb)) {
                out[k] = kMissing;
            } else {
                double num = static_cast<double>(wd * sab - sa * sb);
                out[k] = clamp_r(num / std::sqrt(denom_a * denom_b));
            }
        }
        if (k == n - w) break;
        if (++steps_since_renorm >= 4096) {
            recompute(k + 1);
            steps_since_renorm = 0;
        } else {
            exclude(k);
            include(k + w);
        }
    }
    return out;
}

CorrelationFrame correlation_matrix(const std::vector<std::span<const double>>& channels,
                                    int t_synch, std::size_t end_index) {
    const int p = static_cast<int>(channels.size());
    if (p < 2) throw config_error("correlation matrix needs at least 2 channels");
    if (t_synch < 2) throw config_error("t_synch must be >= 2");
    const auto w = static_cast<std::size_t>(t_synch);
    if (end_index + 1 < w) throw config_error("window extends before the first sample");
    const std::size_t begin = end_index + 1 - w;
    for (const auto& c : channels)
        if (end_index >= c.size())
            throw config_error("window extends past the end of a channel");

    CorrelationFrame frame;
    frame.time_index = end_index;
    frame.t_synch = t_synch;
    frame.p = p;
    frame.r.assign(static_cast<std::size_t>(p) * p, 1.0);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            double r = pearson(channels[i].subspan(begin, w), channels[j].subspan(begin, w));
            frame.r[static_cast<std::size_t>(i) * p + j] = r;
            frame.r[static_cast<std::size_t>(j) * p + i] = r;
        }
    return frame;
}

std::vector<double> symmetric_eigenvalues(const CorrelationFrame& frame) {
    const int p = frame.p;
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = frame.at(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw error("eigenvalue decomposition failed");
    std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + p);
    return ev;
}

double multiway_coeff(const CorrelationFrame& frame) {
    if (frame.p < 2) throw config_error("multiway coefficient needs at least 2 channels");
    for (double v : frame.r)
        if (is_missing(v)) return kMissing;
    std::vector<double> ev = symmetric_eigenvalues(frame);
    const double p = static_cast<double>(frame.p);
    double mean = 0;
    for (double v : ev) mean += v;
    mean /= p;
    double var = 0;
    for (double v : ev) var += (v - mean) * (v - mean);
    var /= p;
    // population std is sqrt(p-1) when the matrix is rank one (all |r| = 1)
    return std::clamp(std::sqrt(var) / std::sqrt(p - 1.0), 0.0, 1.0);
}

PairCorrelations rolling_pairs(const std::vector<std::span<const double>>& channels,
                               int t_synch, int threads) {
    const int p = static_cast<int>(channels.size());
    if (p < 2) throw config_error("rolling_pairs needs at least 2 channels");
    const std::size_t n = channels[0].size();
    for (const auto& c : channels)
        if (c.size() != n) throw input_error("rolling_pairs: channel lengths differ");
    if (n < static_cast<std::size_t>(t_synch))
        throw config_error("series shorter than rolling window");

    PairCorrelations pc;
    pc.n_channels = p;
    pc.t_synch = t_synch;
    pc.n_positions = n - static_cast<std::size_t>(t_synch) + 1;
    pc.pairs = all_pairs(p);
    pc.r.resize(pc.pairs.size());
    parallel_for(pc.pairs.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k)
            pc.r[k] = rolling_pearson(channels[static_cast<std::size_t>(pc.pairs[k].i)],
                                      channels[static_cast<std::size_t>(pc.pairs[k].j)], t_synch);
    });
    return pc;
}

}  // namespace synckit
