#include "fdaderiv/covdiag.hpp"

#include "fdaderiv/csv.hpp"
#include "fdaderiv/errors.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace fdaderiv {

CovObservations cov_raw(const FunctionalDataset& data, const DerivativeEstimate& mean_fit) {
    if (data.grid().dim() != 1)
        throw ConfigError("covariance diagnostic supports 1-d designs only");
    if (data.n() < 2) throw ConfigError("covariance estimation needs at least two curves");
    if (mean_fit.s.order() != 0)
        throw ConfigError("covariance centering requires a mean fit (derivative order 0)");
    const std::size_t p = data.grid().total_size();
    if (mean_fit.size() != p)
        throw ConfigError("mean fit must cover every design point");

    Eigen::VectorXd mu(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        if (mean_fit.flagged[j] || !std::isfinite(mean_fit.values[j]))
            throw NumericalError("mean fit is degenerate at a design point; "
                                 "increase the bandwidth");
        mu[static_cast<Eigen::Index>(j)] = mean_fit.values[j];
    }

    const Eigen::MatrixXd centered = data.values().rowwise() - mu.transpose();
    CovObservations obs;
    obs.axis = data.grid().axis(0);
    obs.n = data.n();
    obs.products = centered.transpose() * centered / static_cast<double>(data.n());
    return obs;
}

namespace {

struct TriangleFit {
    std::vector<double> x;
    std::vector<double> coef_first;  // partial along the first argument
    std::vector<double> coef_second; // partial along the second argument
    std::vector<bool> flagged;
};

// Local polynomial fit of the covariance surface at diagonal points (x0, x0)
// using only cells with x_j < x_k (strict upper triangle; reflect = true
// swaps the roles, producing the lower-triangle fit).
TriangleFit fit_triangle(const CovObservations& obs, double h, int m, const Kernel& kernel2d,
                         const WeightOptions& options, bool reflect) {
    if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");
    if (m < 1) throw ConfigError("covariance fit order must be >= 1");
    if (kernel2d.dim != 2) throw ConfigError("covariance fit needs a 2-d kernel");

    const std::vector<double>& ax = obs.axis;
    const std::size_t p = ax.size();
    const BasisLayout layout = enumerate_basis(2, m);
    const Eigen::Index nb = layout.size();
    const Eigen::Index pos10 = layout.position(MultiIndex({1, 0}));
    const Eigen::Index pos01 = layout.position(MultiIndex({0, 1}));

    TriangleFit fit;
    for (std::size_t q = 0; q < p; ++q) {
        const double x0 = ax[q];
        if (x0 < h || x0 > 1.0 - h) continue; // same boundary trimming as the mean fit
        fit.x.push_back(x0);

        const auto first = std::lower_bound(ax.begin(), ax.end(), x0 - h) - ax.begin();
        const auto last = std::upper_bound(ax.begin(), ax.end(), x0 + h) - ax.begin();

        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nb, nb);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
        Eigen::VectorXd basis;
        double u[2];
        std::size_t cells = 0;
        for (auto j = first; j < last; ++j) {
            for (auto k = j + 1; k < last; ++k) { // strict upper triangle, nugget excluded
                const double sj = ax[static_cast<std::size_t>(j)];
                const double tk = ax[static_cast<std::size_t>(k)];
                u[0] = ((reflect ? tk : sj) - x0) / h;
                u[1] = ((reflect ? sj : tk) - x0) / h;
                const double kv = kernel2d(std::span<const double>(u, 2));
                if (kv == 0.0) continue;
                basis_vector_into(layout, std::span<const double>(u, 2), basis);
                a.selfadjointView<Eigen::Lower>().rankUpdate(basis, kv);
                rhs += kv *
                       obs.products(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
                       basis;
                ++cells;
            }
        }
        a = a.selfadjointView<Eigen::Lower>();

        bool ok = cells >= static_cast<std::size_t>(nb);
        Eigen::VectorXd theta;
        if (ok) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
            const double floor =
                options.eigenvalue_floor_scale * a.trace() / static_cast<double>(nb);
            if (!(es.eigenvalues().minCoeff() > floor) || !(floor > 0.0)) {
                ok = false;
            } else {
                Eigen::LLT<Eigen::MatrixXd> llt(a);
                if (llt.info() == Eigen::Success) {
                    theta = llt.solve(rhs);
                } else {
                    ok = false;
                }
            }
        }
        if (ok) {
            fit.coef_first.push_back(theta[pos10] / h);
            fit.coef_second.push_back(theta[pos01] / h);
            fit.flagged.push_back(false);
        } else {
            fit.coef_first.push_back(std::numeric_limits<double>::quiet_NaN());
            fit.coef_second.push_back(std::numeric_limits<double>::quiet_NaN());
            fit.flagged.push_back(true);
        }
    }
    if (fit.x.empty())
        throw ConfigError("no diagonal points inside [h, 1-h]; decrease the bandwidth");
    return fit;
}

} // namespace

CovPartials estimate_cov_partials_upper(const CovObservations& obs, double h, int m,
                                        const Kernel& kernel2d, const WeightOptions& options) {
    TriangleFit fit = fit_triangle(obs, h, m, kernel2d, options, false);
    return CovPartials{std::move(fit.x), std::move(fit.coef_second), std::move(fit.coef_first),
                       std::move(fit.flagged)};
}

CovPartials estimate_cov_partials_lower(const CovObservations& obs, double h, int m,
                                        const Kernel& kernel2d, const WeightOptions& options) {
    TriangleFit fit = fit_triangle(obs, h, m, kernel2d, options, true);
    return CovPartials{std::move(fit.x), std::move(fit.coef_second), std::move(fit.coef_first),
                       std::move(fit.flagged)};
}

DiagonalReport smoothness_report(const FunctionalDataset& data, double h,
                                 const SmoothnessOptions& options) {
    const Kernel k1 = epanechnikov_product_kernel(1);
    const MultiIndex s0 = MultiIndex::scalar(0);
    const DerivativeEstimate mean_fit =
        estimate_derivative(data, s0, options.mean_order, h, all_eval_points(data.grid()), k1,
                            options.weights);
    const CovObservations obs = cov_raw(data, mean_fit);
    const CovPartials partials =
        estimate_cov_partials_upper(obs, h, options.order, epanechnikov_product_kernel(2),
                                    options.weights);

    DiagonalReport report;
    report.x = partials.x;
    report.d_second = partials.d_second;
    report.d_first = partials.d_first;
    report.flagged = partials.flagged;
    for (std::size_t i = 0; i < partials.x.size(); ++i) {
        if (partials.flagged[i]) {
            ++report.flagged_count;
            continue;
        }
        report.max_discrepancy =
            std::max(report.max_discrepancy, std::abs(partials.d_second[i] - partials.d_first[i]));
        report.scale = std::max({report.scale, std::abs(partials.d_second[i]),
                                 std::abs(partials.d_first[i])});
    }

    // Nugget estimate: the diagonal of the raw products is inflated by the
    // observation-noise variance relative to its immediate off-diagonal.
    const std::size_t p = obs.axis.size();
    double nugget = 0.0;
    for (std::size_t j = 0; j + 1 < p; ++j) {
        nugget += obs.products(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) -
                  obs.products(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1));
    }
    nugget = std::max(0.0, nugget / static_cast<double>(p - 1));
    report.noise_floor =
        3.0 * nugget / (h * std::sqrt(static_cast<double>(obs.n))) + 1e-12;
    report.indeterminate = report.scale < report.noise_floor;
    report.ratio = report.indeterminate ? 0.0 : report.max_discrepancy / report.scale;
    return report;
}

void write_diagonal_csv(const DiagonalReport& report, std::ostream& out) {
    out << "x,d_second,d_first,abs_diff,flagged\n";
    for (std::size_t i = 0; i < report.x.size(); ++i) {
        out << format_double(report.x[i]) << "," << format_double(report.d_second[i]) << ","
            << format_double(report.d_first[i]) << ","
            << format_double(std::abs(report.d_second[i] - report.d_first[i])) << ","
            << (report.flagged[i] ? 1 : 0) << "\n";
    }
}

std::string diagonal_summary_json(const DiagonalReport& report) {
    nlohmann::json j;
    j["max_discrepancy"] = report.max_discrepancy;
    j["scale"] = report.scale;
    j["ratio"] = report.ratio;
    j["noise_floor"] = report.noise_floor;
    j["indeterminate"] = report.indeterminate;
    j["flagged_points"] = report.flagged_count;
    return j.dump(2);
}

} // namespace fdaderiv
