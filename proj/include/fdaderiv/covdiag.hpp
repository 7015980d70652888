#pragma once

#include "fdaderiv/dataset.hpp"
#include "fdaderiv/estimator.hpp"

#include <iosfwd>

namespace fdaderiv {

/// Centered cross-products of a 1-d dataset, C_{j,k} = n^{-1} sum_i
/// (Y_{i,j} - mu_hat(x_j)) (Y_{i,k} - mu_hat(x_k)). The matrix is symmetric;
/// the diagnostic only reads the upper triangle x_j <= x_k.
struct CovObservations {
    std::vector<double> axis;
    Eigen::MatrixXd products;
    Eigen::Index n = 0;
};

CovObservations cov_raw(const FunctionalDataset& data, const DerivativeEstimate& mean_fit);

/// Restricted first-order partial derivatives of the covariance kernel on the
/// diagonal, fitted from upper-triangle cells only (one-sided windows, the
/// diagonal cells excluded to avoid the noise nugget).
struct CovPartials {
    std::vector<double> x;
    std::vector<double> d_second; // d/dy Gamma(x, y)|_upper at (x,x)
    std::vector<double> d_first;  // d/dx Gamma(x, y)|_upper at (x,x)
    std::vector<bool> flagged;
};

CovPartials estimate_cov_partials_upper(const CovObservations& obs, double h, int m,
                                        const Kernel& kernel2d,
                                        const WeightOptions& options = {});
/// Same fit on the lower triangle, implemented by reflecting the pairs.
CovPartials estimate_cov_partials_lower(const CovObservations& obs, double h, int m,
                                        const Kernel& kernel2d,
                                        const WeightOptions& options = {});

/// Diagonal comparison of the two restricted partials. D is the largest
/// discrepancy, S the largest magnitude; the report is marked indeterminate
/// when S falls below the estimated noise floor.
struct DiagonalReport {
    std::vector<double> x;
    std::vector<double> d_second;
    std::vector<double> d_first;
    std::vector<bool> flagged;
    double max_discrepancy = 0.0; // D
    double scale = 0.0;           // S
    double ratio = 0.0;           // D / S (0 when indeterminate)
    double noise_floor = 0.0;
    bool indeterminate = false;
    std::size_t flagged_count = 0;
};

struct SmoothnessOptions {
    int order = 2;           // bivariate polynomial order of the restricted fit
    int mean_order = 2;      // order of the mean fit used for centering
    WeightOptions weights;
};

DiagonalReport smoothness_report(const FunctionalDataset& data, double h,
                                 const SmoothnessOptions& options = {});

void write_diagonal_csv(const DiagonalReport& report, std::ostream& out);
std::string diagonal_summary_json(const DiagonalReport& report);

} // namespace fdaderiv
