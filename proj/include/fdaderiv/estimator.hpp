#pragma once

#include "fdaderiv/dataset.hpp"
#include "fdaderiv/weights.hpp"

#include <iosfwd>

namespace fdaderiv {

/// Estimated partial derivative of the mean function on an evaluation grid.
/// Points where the local fit was degenerate are flagged; flagged values are
/// NaN when no fallback solve was possible.
struct DerivativeEstimate {
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    std::vector<bool> flagged;
    double h = 0.0;
    MultiIndex s;
    int m = 0;
    std::string kernel_id;

    std::size_t size() const { return points.size(); }
    bool all_flagged() const;
};

/// Pointwise mean over curves, bar{Y}_j.
Eigen::VectorXd mean_curve(const FunctionalDataset& data);

/// Design-grid points with every coordinate in [h, 1-h] (flat indices and
/// coordinates), the default evaluation set.
std::vector<std::vector<double>> trimmed_eval_points(const DesignGrid& grid, double h);
std::vector<std::size_t> trimmed_flat_indices(const DesignGrid& grid, double h);
std::vector<std::vector<double>> all_eval_points(const DesignGrid& grid);

DerivativeEstimate estimate_derivative(const FunctionalDataset& data, const MultiIndex& s,
                                       int m, double h,
                                       const std::vector<std::vector<double>>& eval_points,
                                       const Kernel& kernel, const WeightOptions& options = {});

/// 1-d convenience with the default Epanechnikov kernel and trimmed grid.
DerivativeEstimate estimate_derivative(const FunctionalDataset& data, int s, int m, double h,
                                       bool trim = true);

void write_estimate_csv(const DerivativeEstimate& est, std::ostream& out);

/// Leave-one-curve-out bandwidth selection for the mean fit (s = 0). The
/// held-out mean is obtained by downdating the row mean, never by refitting
/// weights. Ties break toward smaller h.
struct CvResult {
    double selected_h = 0.0;
    std::vector<double> bandwidths;
    std::vector<double> scores;     // NaN where the bandwidth was degenerate
    std::vector<bool> degenerate;
};

CvResult cv_bandwidth(const FunctionalDataset& data, int m, std::span<const double> h_grid,
                      const Kernel& kernel, const WeightOptions& options = {});

} // namespace fdaderiv
