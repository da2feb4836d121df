#include "synckit/detrend.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace synckit {

double PolynomialModel::evaluate_index(double index) const {
    double x = (index - x_offset) / x_scale;
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
}

FitResult polyfit_lm(std::span<const double> series, int order, const LmConfig& cfg) {
    if (order < 1 || order > 12)
        throw config_error("detrend order must be in [1, 12], got " + std::to_string(order));
    const std::size_t n = series.size();

    std::vector<std::size_t> valid;
    valid.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(series[i])) valid.push_back(i);
    if (valid.size() < static_cast<std::size_t>(order) + 1)
        throw config_error("series has " + std::to_string(valid.size()) +
                           " finite samples, need at least " + std::to_string(order + 1));

    const int m = order + 1;
    const auto nv = static_cast<Eigen::Index>(valid.size());

    PolynomialModel model;
    model.order = order;
    model.n_points = n;
    model.x_offset = static_cast<double>(n - 1) / 2.0;
    model.x_scale = n > 1 ? static_cast<double>(n - 1) / 2.0 : 1.0;

    // Design matrix on the normalized grid; constant for a linear-in-
    // parameters model, so the normal matrix is formed once.
    Eigen::MatrixXd V(nv, m);
    Eigen::VectorXd y(nv);
    for (Eigen::Index r = 0; r < nv; ++r) {
        double x = (static_cast<double>(valid[static_cast<std::size_t>(r)]) - model.x_offset) /
                   model.x_scale;
        double p = 1.0;
        for (int k = 0; k < m; ++k) {
            V(r, k) = p;
            p *= x;
        }
        y(r) = series[valid[static_cast<std::size_t>(r)]];
    }

    Eigen::MatrixXd A = V.transpose() * V;
    Eigen::VectorXd Vty = V.transpose() * y;
    Eigen::VectorXd diag = A.diagonal();

    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd resid = y;
    double sse = resid.squaredNorm();
    double lambda = cfg.damping_init;
    // grad_tol is relative to the gradient at the zero model
    double grad_scale = std::max(Vty.lpNorm<Eigen::Infinity>(), 1.0);

    FitReport report;
    report.n_valid = valid.size();
    report.final_damping = lambda;

    while (report.iterations < cfg.max_iter) {
        Eigen::VectorXd g = Vty - A * c;  // = V^T resid
        if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol * grad_scale) {
            report.converged = true;
            break;
        }

        Eigen::MatrixXd M = A;
        M.diagonal() += lambda * diag;
        Eigen::LDLT<Eigen::MatrixXd> solver(M);
        Eigen::VectorXd step = solver.solve(g);
        ++report.iterations;
        if (solver.info() != Eigen::Success || !step.allFinite())
            throw error("singular normal system in polynomial fit (order " +
                        std::to_string(order) + ")");

        Eigen::VectorXd candidate = c + step;
        double cand_sse = (y - V * candidate).squaredNorm();
        if (cand_sse < sse) {
            c = candidate;
            sse = cand_sse;
            resid = y - V * c;
            lambda = std::max(lambda / 10.0, 1e-15);
            if (step.norm() <= cfg.step_tol * (c.norm() + cfg.step_tol)) {
                report.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e15) break;  // stuck; report non-convergence
        }
    }

    model.coeffs.assign(c.data(), c.data() + m);
    report.final_sse = sse;
    report.final_damping = lambda;
    FitResult out;
    out.model = std::move(model);
    out.report = report;
    return out;
}

ResidualSeries residual(std::span<const double> series, const PolynomialModel& model) {
    if (series.size() != model.n_points)
        throw input_error("residual: series length " + std::to_string(series.size()) +
                          " does not match fitted length " + std::to_string(model.n_points));
    ResidualSeries out;
    out.model = model;
    out.values.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        out.values[i] = is_missing(series[i])
                            ? kMissing
                            : series[i] - model.evaluate_index(static_cast<double>(i));
    return out;
}

}  // namespace synckit
