#include "synckit/filtering.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace synckit {

namespace {

// RBJ cookbook low-pass section for digital cutoff omega_c = pi * cutoff.
Biquad design_lowpass_section(double cutoff, double q) {
    double omega = std::numbers::pi * cutoff;
    double cs = std::cos(omega);
    double alpha = std::sin(omega) / (2.0 * q);
    double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 - cs) / 2.0 / a0;
    s.b1 = (1.0 - cs) / a0;
    s.b2 = (1.0 - cs) / 2.0 / a0;
    s.a1 = -2.0 * cs / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

}  // namespace

LowpassFilter::LowpassFilter(const LowpassConfig& cfg) {
    if (!(cfg.cutoff > 0.0 && cfg.cutoff < 1.0))
        throw config_error("lowpass cutoff must be in (0, 1), got " + format_double(cfg.cutoff));
    if (cfg.order != 2 && cfg.order != 4)
        throw config_error("lowpass order must be 2 or 4, got " + std::to_string(cfg.order));
    if (cfg.order == 2) {
        sections_.push_back(design_lowpass_section(cfg.cutoff, std::numbers::sqrt2 / 2.0));
    } else {
        // Butterworth pole pairs: Q = 1 / (2 cos(theta_k))
        sections_.push_back(design_lowpass_section(cfg.cutoff, 1.0 / (2.0 * std::cos(std::numbers::pi / 8.0))));
        sections_.push_back(design_lowpass_section(cfg.cutoff, 1.0 / (2.0 * std::cos(3.0 * std::numbers::pi / 8.0))));
    }
}

double LowpassFilter::magnitude(double omega) const {
    std::complex<double> z1 = std::polar(1.0, -omega);
    std::complex<double> z2 = z1 * z1;
    double mag = 1.0;
    for (const auto& s : sections_) {
        std::complex<double> num = s.b0 + s.b1 * z1 + s.b2 * z2;
        std::complex<double> den = 1.0 + s.a1 * z1 + s.a2 * z2;
        mag *= std::abs(num) / std::abs(den);
    }
    return mag;
}

std::vector<double> LowpassFilter::apply(std::span<const double> series) const {
    std::vector<double> out(series.begin(), series.end());
    const std::size_t n = out.size();
    std::size_t i = 0;
    while (i < n) {
        while (i < n && is_missing(out[i])) ++i;
        std::size_t begin = i;
        while (i < n && !is_missing(out[i])) ++i;
        if (begin == i) continue;
        // Transposed direct form II per section, state seeded for steady
        // output equal to the run's first sample (each section has unit DC
        // gain, so the seed value carries through the cascade).
        for (const auto& s : sections_) {
            double x0 = out[begin];
            double s1 = x0 * (1.0 - s.b0);
            double s2 = x0 * (1.0 - s.b0 - s.b1 + s.a1);
            for (std::size_t k = begin; k < i; ++k) {
                double x = out[k];
                double y = s.b0 * x + s1;
                s1 = s.b1 * x - s.a1 * y + s2;
                s2 = s.b2 * x - s.a2 * y;
                out[k] = y;
            }
        }
    }
    return out;
}

std::vector<double> lowpass(std::span<const double> series, const LowpassConfig& cfg) {
    LowpassFilter filter(cfg);
    if (series.size() <= static_cast<std::size_t>(3 * cfg.order))
        throw config_error("series length " + std::to_string(series.size()) +
                           " too short for filter order " + std::to_string(cfg.order));
    return filter.apply(series);
}

}  // namespace synckit
