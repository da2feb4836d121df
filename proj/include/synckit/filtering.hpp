#pragma once

#include <span>
#include <vector>

#include "synckit/common.hpp"

namespace synckit {

struct LowpassConfig {
    double cutoff = 0.1;  // fraction of Nyquist, in (0, 1)
    int order = 2;        // 2 or 4, cascaded second-order sections
};

struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0;  // a0 normalized to 1
    double a1 = 0, a2 = 0;
};

// Butterworth low-pass as cascaded biquads, causal single pass. Sections are
// initialized to steady state at the first sample of each contiguous run, so
// a constant stays a constant and detrended residuals see no start-up kick.
class LowpassFilter {
public:
    explicit LowpassFilter(const LowpassConfig& cfg);

    const std::vector<Biquad>& sections() const { return sections_; }

    // |H(e^{i omega})|, omega in rad/sample (pi = Nyquist).
    double magnitude(double omega) const;

    // Missing samples split the series; each finite run is filtered
    // independently and missing positions stay missing.
    std::vector<double> apply(std::span<const double> series) const;

private:
    std::vector<Biquad> sections_;
};

std::vector<double> lowpass(std::span<const double> series, const LowpassConfig& cfg);

}  // namespace synckit
