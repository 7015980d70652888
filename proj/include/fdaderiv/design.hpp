#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fdaderiv {

/// Fixed synchronous design with Cartesian product structure: one sorted,
/// strictly increasing point list per axis, all points in [0,1].
/// Flattened indices are row-major over the axes (last axis fastest).
class DesignGrid {
public:
    explicit DesignGrid(std::vector<std::vector<double>> axes);

    int dim() const { return static_cast<int>(axes_.size()); }
    const std::vector<double>& axis(int k) const { return axes_[static_cast<std::size_t>(k)]; }
    std::vector<std::size_t> shape() const;
    std::size_t total_size() const;
    std::size_t min_axis_count() const;

    void point_at(std::size_t flat, std::span<double> out) const;
    std::vector<double> point(std::size_t flat) const;

    /// Index range [lo, hi) of axis-k points inside [center - h, center + h].
    std::pair<std::size_t, std::size_t> axis_window(int k, double center, double h) const;

    /// Number of grid points with |x_j - x|_inf <= h (product of axis counts).
    std::size_t count_in_window(std::span<const double> x, double h) const;

private:
    std::vector<std::vector<double>> axes_;
};

/// Midpoint grid x_l = (l - 0.5) / p on one axis (the quantile design of the
/// uniform density).
std::vector<double> midpoint_axis(std::size_t p);
DesignGrid uniform_midpoint_grid(std::span<const std::size_t> counts);
DesignGrid uniform_midpoint_grid(std::size_t p); // d = 1

/// Per-axis design density: Lipschitz, bounded away from 0 and infinity,
/// integrating to one on [0,1]. An analytic CDF may be supplied; otherwise the
/// CDF is computed by adaptive quadrature.
struct DesignDensity {
    std::function<double(double)> pdf;
    double f_min = 0.0;
    double f_max = 0.0;
    double lipschitz = 0.0;
    std::optional<std::function<double(double)>> cdf;

    /// Checks 0 < f_min <= pdf <= f_max on a sample lattice and that the
    /// density integrates to 1 within 1e-6. Throws ConfigError otherwise.
    void validate() const;
};

DesignDensity uniform_density();

/// Quantile design of Assumption-4 type: per axis k, the l-th point solves
/// CDF_k(x) = (l - 0.5) / p_k. Root-finding is bisection run to adjacent
/// doubles, then snapped to the bracket endpoint with the smaller residual.
DesignGrid quantile_design(std::span<const DesignDensity> densities,
                           std::span<const std::size_t> counts);
DesignGrid quantile_design(const DesignDensity& density, std::size_t p); // d = 1

/// Sampled estimate of the design-regularity constant:
/// max over (x, h) samples of card{j : |x_j - x|_inf <= h} / (h^d p^1).
double check_regularity(const DesignGrid& grid,
                        std::span<const double> h_samples,
                        const std::vector<std::vector<double>>& x_samples);

/// Default sample sets: a uniform lattice of evaluation points and
/// h in {1/p_min, 2/p_min, ...} capped at 0.5.
double check_regularity(const DesignGrid& grid);

/// JSON document {"axes": [[...], ...]}.
std::string grid_to_json(const DesignGrid& grid);
DesignGrid grid_from_json(const std::string& text);

} // namespace fdaderiv
