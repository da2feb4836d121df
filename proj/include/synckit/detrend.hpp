#pragma once

#include <span>
#include <string>
#include <vector>

#include "synckit/common.hpp"

namespace synckit {

// Order-n polynomial trend, coefficients in the normalized-index basis
// x = (index - x_offset) / x_scale in [-1, 1]. Raw index powers above ~x^6
// over thousands of samples are too ill-conditioned to fit directly.
struct PolynomialModel {
    int order = 0;
    std::vector<double> coeffs;  // k_0 .. k_n
    double x_offset = 0.0;
    double x_scale = 1.0;
    std::size_t n_points = 0;  // length of the series the model was fit on

    double evaluate_index(double index) const;
};

struct LmConfig {
    int max_iter = 200;
    double grad_tol = 1e-10;  // on the normalized gradient
    double step_tol = 1e-12;
    double damping_init = 1e-3;
};

struct FitReport {
    int iterations = 0;  // candidate steps evaluated
    double final_sse = 0.0;
    bool converged = false;
    double final_damping = 0.0;
    std::size_t n_valid = 0;  // finite samples entering the fit
};

struct FitResult {
    PolynomialModel model;
    FitReport report;
};

// Levenberg-Marquardt fit of the order-n trend: damped normal equations,
// damping /10 on accepted steps and x10 on rejected ones. Missing samples
// are excluded from the fit. Non-convergence within max_iter is reported,
// not thrown; a singular normal system is an error.
FitResult polyfit_lm(std::span<const double> series, int order,
                     const LmConfig& cfg = {});

struct ResidualSeries {
    std::vector<double> values;  // same unit as the input
    std::string channel_id;
    PolynomialModel model;
};

// m_i = data_i - fit(x_i); missing samples stay missing.
ResidualSeries residual(std::span<const double> series, const PolynomialModel& model);

}  // namespace synckit
