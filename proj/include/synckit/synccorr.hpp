#pragma once

#include <span>
#include <vector>

#include "synckit/common.hpp"

namespace synckit {

struct PairId {
    int i = 0, j = 0;  // channel indices, canonical i < j
};

std::vector<PairId> all_pairs(int n_channels);

// Pearson correlation of two equal-length windows. Returns kMissing when a
// window contains missing samples or has no usable variance (relative spread
// below ~1e-12 of its mean); an undefined correlation is never reported as 0.
double pearson(std::span<const double> a, std::span<const double> b);

// Trailing-window rolling correlation: out[k] covers samples [k, k + window).
// Streaming O(1) updates on extended-precision running sums, with a full
// recomputation every 4096 steps to bound drift.
std::vector<double> rolling_pearson(std::span<const double> a,
                                    std::span<const double> b, int window);

// Symmetric pairwise correlation matrix at one time index (trailing window
// ending there), unit diagonal.
struct CorrelationFrame {
    std::size_t time_index = 0;  // sample index of the window end
    int t_synch = 0;
    int p = 0;
    std::vector<double> r;  // p*p row-major

    double at(int i, int j) const {
        return r[static_cast<std::size_t>(i) * p + j];
    }
};

CorrelationFrame correlation_matrix(const std::vector<std::span<const double>>& channels,
                                    int t_synch, std::size_t end_index);

// Eigenvalue-spread summary of a correlation matrix: population standard
// deviation of the eigenvalues scaled so the identity matrix gives 0 and a
// rank-one matrix gives 1. Undefined entries make the result undefined.
double multiway_coeff(const CorrelationFrame& frame);

// Eigenvalues of the frame's matrix, ascending.
std::vector<double> symmetric_eigenvalues(const CorrelationFrame& frame);

// All C(p,2) rolling correlation series over a channel set.
// r[pair][k] covers samples [k, k + t_synch).
struct PairCorrelations {
    int n_channels = 0;
    int t_synch = 0;
    std::size_t n_positions = 0;
    std::vector<PairId> pairs;
    std::vector<std::vector<double>> r;

    std::size_t sample_index(std::size_t position) const {
        return position + static_cast<std::size_t>(t_synch) - 1;
    }
};

// Pairs are computed independently (optionally in parallel); results are
// bit-identical to sequential evaluation.
PairCorrelations rolling_pairs(const std::vector<std::span<const double>>& channels,
                               int t_synch, int threads = 1);

}  // namespace synckit
