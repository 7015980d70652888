#include "fdaderiv/estimator.hpp"

#include "fdaderiv/csv.hpp"
#include "fdaderiv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace fdaderiv {

bool DerivativeEstimate::all_flagged() const {
    return std::all_of(flagged.begin(), flagged.end(), [](bool f) { return f; });
}

Eigen::VectorXd mean_curve(const FunctionalDataset& data) {
    return data.values().colwise().mean();
}

std::vector<std::size_t> trimmed_flat_indices(const DesignGrid& grid, double h) {
    std::vector<std::size_t> idx;
    std::vector<double> pt(static_cast<std::size_t>(grid.dim()));
    for (std::size_t j = 0; j < grid.total_size(); ++j) {
        grid.point_at(j, pt);
        bool inside = true;
        for (double c : pt) {
            if (c < h || c > 1.0 - h) inside = false;
        }
        if (inside) idx.push_back(j);
    }
    return idx;
}

std::vector<std::vector<double>> trimmed_eval_points(const DesignGrid& grid, double h) {
    std::vector<std::vector<double>> pts;
    for (std::size_t j : trimmed_flat_indices(grid, h)) pts.push_back(grid.point(j));
    return pts;
}

std::vector<std::vector<double>> all_eval_points(const DesignGrid& grid) {
    std::vector<std::vector<double>> pts;
    pts.reserve(grid.total_size());
    for (std::size_t j = 0; j < grid.total_size(); ++j) pts.push_back(grid.point(j));
    return pts;
}

DerivativeEstimate estimate_derivative(const FunctionalDataset& data, const MultiIndex& s,
                                       int m, double h,
                                       const std::vector<std::vector<double>>& eval_points,
                                       const Kernel& kernel, const WeightOptions& options) {
    const Eigen::VectorXd ybar = mean_curve(data);
    DerivativeEstimate est;
    est.points = eval_points;
    est.h = h;
    est.s = s;
    est.m = m;
    est.kernel_id = kernel.id;
    est.values.resize(eval_points.size(), std::numeric_limits<double>::quiet_NaN());
    est.flagged.resize(eval_points.size(), false);
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
        try {
            const WeightSet ws =
                local_poly_weights(data.grid(), eval_points[i], h, s, m, kernel, options);
            est.values[i] = ws.apply(ybar);
            est.flagged[i] = ws.degenerate;
        } catch (const SingularDesignError&) {
            est.flagged[i] = true;
        }
    }
    return est;
}

DerivativeEstimate estimate_derivative(const FunctionalDataset& data, int s, int m, double h,
                                       bool trim) {
    if (data.grid().dim() != 1)
        throw ConfigError("scalar-order overload requires a 1-d design");
    const auto pts = trim ? trimmed_eval_points(data.grid(), h) : all_eval_points(data.grid());
    return estimate_derivative(data, MultiIndex::scalar(s), m, h, pts,
                               epanechnikov_product_kernel(1));
}

void write_estimate_csv(const DerivativeEstimate& est, std::ostream& out) {
    const int d = est.points.empty() ? 1 : static_cast<int>(est.points.front().size());
    for (int k = 0; k < d; ++k) out << "x" << (k + 1) << ",";
    out << "estimate,flagged\n";
    for (std::size_t i = 0; i < est.size(); ++i) {
        for (double c : est.points[i]) out << format_double(c) << ",";
        out << format_double(est.values[i]) << "," << (est.flagged[i] ? 1 : 0) << "\n";
    }
}

CvResult cv_bandwidth(const FunctionalDataset& data, int m, std::span<const double> h_grid,
                      const Kernel& kernel, const WeightOptions& options) {
    if (data.n() < 2) throw ConfigError("cross validation needs at least two curves");
    if (h_grid.empty()) throw ConfigError("cross validation needs a non-empty bandwidth grid");

    const DesignGrid& grid = data.grid();
    const std::size_t p1 = grid.total_size();
    const double n = static_cast<double>(data.n());
    const Eigen::VectorXd ybar = mean_curve(data);
    const MultiIndex s0(std::vector<int>(static_cast<std::size_t>(grid.dim()), 0));

    std::vector<std::size_t> order(h_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return h_grid[a] < h_grid[b]; });

    CvResult result;
    result.bandwidths.assign(h_grid.begin(), h_grid.end());
    result.scores.assign(h_grid.size(), std::numeric_limits<double>::quiet_NaN());
    result.degenerate.assign(h_grid.size(), false);

    double best_score = std::numeric_limits<double>::infinity();
    bool any_valid = false;

    for (std::size_t oi : order) {
        const double h = h_grid[oi];
        // Mean-fit smoother rows at every design point.
        std::vector<WeightSet> smoother;
        smoother.reserve(p1);
        bool degenerate = false;
        for (std::size_t q = 0; q < p1; ++q) {
            try {
                smoother.push_back(
                    local_poly_weights(grid, grid.point(q), h, s0, m, kernel, options));
            } catch (const SingularDesignError&) {
                degenerate = true;
                break;
            }
        }
        if (degenerate) {
            result.degenerate[oi] = true;
            continue;
        }

        double score = 0.0;
        Eigen::VectorXd fit_all(static_cast<Eigen::Index>(p1));
        for (std::size_t q = 0; q < p1; ++q) fit_all[static_cast<Eigen::Index>(q)] = smoother[q].apply(ybar);
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            const Eigen::VectorXd yi = data.values().row(i);
            for (std::size_t q = 0; q < p1; ++q) {
                // Downdated mean: bar{Y}^{(-i)} = (n bar{Y} - Y_i) / (n - 1).
                const double fit_i = smoother[q].apply(yi);
                const double loo = (n * fit_all[static_cast<Eigen::Index>(q)] - fit_i) / (n - 1.0);
                const double r = yi[static_cast<Eigen::Index>(q)] - loo;
                score += r * r;
            }
        }
        result.scores[oi] = score;
        if (!any_valid || score < best_score) {
            any_valid = true;
            best_score = score;
            result.selected_h = h;
        }
    }
    if (!any_valid) throw NumericalError("no valid bandwidth in the cross-validation grid");
    return result;
}

} // namespace fdaderiv
