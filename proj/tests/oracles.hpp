// Independent reference implementations used only by tests. These stay
// deliberately naive and separate from the library code paths they check.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "synckit/filtering.hpp"
#include "synckit/simulator.hpp"

namespace oracles {

// Direct two-pass evaluation of the correlation formula over one window.
inline double naive_pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(a[i]) || std::isnan(b[i])) return std::nan("");
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double num = 0, da2 = 0, db2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        num += da * db;
        da2 += da * da;
        db2 += db * db;
    }
    if (da2 <= 0 || db2 <= 0) return std::nan("");
    return num / (std::sqrt(da2) * std::sqrt(db2));
}

// Per-window recomputation, O(n * w).
inline std::vector<double> naive_rolling(std::span<const double> a, std::span<const double> b,
                                         int window) {
    const auto w = static_cast<std::size_t>(window);
    std::vector<double> out(a.size() - w + 1);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = naive_pearson(a.subspan(k, w), b.subspan(k, w));
    return out;
}

// Direct linear least squares on the normalized monomial basis via
// Householder QR; the fit oracle for the iterative solver.
struct LinearFit {
    std::vector<double> coeffs;
    double sse = 0;
};

inline LinearFit qr_polyfit(std::span<const double> y, int order) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const int m = order + 1;
    double off = static_cast<double>(y.size() - 1) / 2.0;
    double scale = y.size() > 1 ? off : 1.0;
    Eigen::MatrixXd V(n, m);
    Eigen::VectorXd yv(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        double x = (static_cast<double>(r) - off) / scale;
        double p = 1;
        for (int k = 0; k < m; ++k) {
            V(r, k) = p;
            p *= x;
        }
        yv(r) = y[static_cast<std::size_t>(r)];
    }
    Eigen::VectorXd c = V.colPivHouseholderQr().solve(yv);
    LinearFit fit;
    fit.coeffs.assign(c.data(), c.data() + m);
    fit.sse = (yv - V * c).squaredNorm();
    return fit;
}

// |H(e^{i omega})| computed here from the section coefficients, independent
// of the library's own evaluator.
inline double sos_magnitude(const std::vector<synckit::Biquad>& sections, double omega) {
    std::complex<double> z1 = std::polar(1.0, -omega);
    std::complex<double> z2 = z1 * z1;
    double mag = 1.0;
    for (const auto& s : sections)
        mag *= std::abs(s.b0 + s.b1 * z1 + s.b2 * z2) / std::abs(1.0 + s.a1 * z1 + s.a2 * z2);
    return mag;
}

inline std::vector<double> random_series(std::size_t n, unsigned seed, double sigma = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

}  // namespace oracles

namespace scenarios {

using synckit::sim::SimConfig;
using synckit::sim::WaveEvent;

// In-phase wave on every cell, amplitude as a multiple of the noise RMS.
inline SimConfig wave_scenario(std::uint64_t seed, int n_cells, std::size_t duration,
                               double amplitude_x_noise, std::size_t n_waves = 1) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_cells = n_cells;
    cfg.duration = duration;
    cfg.temperature_channels = false;
    double amp = amplitude_x_noise * cfg.noise_rms;
    // keep waves clear of frame boundaries (2000) and of each other
    std::mt19937 rng(static_cast<unsigned>(seed * 2654435761u + 17));
    std::size_t n_frames = duration / 2000;
    std::vector<std::size_t> frames(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) frames[i] = i;
    std::shuffle(frames.begin(), frames.end(), rng);
    for (std::size_t k = 0; k < n_waves && k < frames.size(); ++k) {
        WaveEvent e;
        e.duration = 120;
        e.period = 60;
        e.amplitude = amp;
        std::uniform_int_distribution<std::size_t> pos(200, 2000 - 200 - e.duration);
        e.t0 = frames[k] * 2000 + pos(rng);
        for (int c = 0; c < n_cells; ++c) e.cells.push_back(c);
        cfg.events.push_back(std::move(e));
    }
    return cfg;
}

// Half the cells flipped: anti-phase pattern.
inline SimConfig anti_phase_scenario(std::uint64_t seed, int n_cells, std::size_t duration,
                                     double amplitude_x_noise) {
    SimConfig cfg = wave_scenario(seed, n_cells, duration, amplitude_x_noise, 1);
    for (auto& e : cfg.events) {
        e.phase_sign.clear();
        for (int c = 0; c < n_cells; ++c) e.phase_sign.push_back(c < n_cells / 2 ? 1 : -1);
    }
    return cfg;
}

inline SimConfig control_scenario(std::uint64_t seed, int n_cells, std::size_t duration) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_cells = n_cells;
    cfg.duration = duration;
    cfg.temperature_channels = false;
    cfg.coupling = 0.0;
    return cfg;
}

}  // namespace scenarios
