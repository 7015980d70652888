#include "fdaderiv/design.hpp"

#include "fdaderiv/errors.hpp"
#include "fdaderiv/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace fdaderiv {

DesignGrid::DesignGrid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw ConfigError("design grid needs at least one axis");
    for (const auto& ax : axes_) {
        if (ax.empty()) throw ConfigError("design grid axis is empty");
        double prev = -1.0;
        for (double x : ax) {
            if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("design points must lie in [0,1]");
            if (!(x > prev)) throw ConfigError("design points must be strictly increasing");
            prev = x;
        }
    }
}

std::vector<std::size_t> DesignGrid::shape() const {
    std::vector<std::size_t> s;
    s.reserve(axes_.size());
    for (const auto& ax : axes_) s.push_back(ax.size());
    return s;
}

std::size_t DesignGrid::total_size() const {
    std::size_t n = 1;
    for (const auto& ax : axes_) n *= ax.size();
    return n;
}

std::size_t DesignGrid::min_axis_count() const {
    std::size_t m = axes_[0].size();
    for (const auto& ax : axes_) m = std::min(m, ax.size());
    return m;
}

void DesignGrid::point_at(std::size_t flat, std::span<double> out) const {
    for (int k = dim() - 1; k >= 0; --k) {
        const auto& ax = axes_[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(k)] = ax[flat % ax.size()];
        flat /= ax.size();
    }
}

std::vector<double> DesignGrid::point(std::size_t flat) const {
    std::vector<double> out(static_cast<std::size_t>(dim()));
    point_at(flat, out);
    return out;
}

std::pair<std::size_t, std::size_t> DesignGrid::axis_window(int k, double center, double h) const {
    const auto& ax = axes_[static_cast<std::size_t>(k)];
    auto lo = std::lower_bound(ax.begin(), ax.end(), center - h);
    auto hi = std::upper_bound(ax.begin(), ax.end(), center + h);
    return {static_cast<std::size_t>(lo - ax.begin()), static_cast<std::size_t>(hi - ax.begin())};
}

std::size_t DesignGrid::count_in_window(std::span<const double> x, double h) const {
    std::size_t count = 1;
    for (int k = 0; k < dim(); ++k) {
        auto [lo, hi] = axis_window(k, x[static_cast<std::size_t>(k)], h);
        count *= (hi - lo);
        if (count == 0) return 0;
    }
    return count;
}

std::vector<double> midpoint_axis(std::size_t p) {
    if (p == 0) throw ConfigError("axis count must be positive");
    std::vector<double> ax(p);
    for (std::size_t l = 0; l < p; ++l) {
        ax[l] = (static_cast<double>(l) + 0.5) / static_cast<double>(p);
    }
    return ax;
}

DesignGrid uniform_midpoint_grid(std::span<const std::size_t> counts) {
    std::vector<std::vector<double>> axes;
    axes.reserve(counts.size());
    for (std::size_t p : counts) axes.push_back(midpoint_axis(p));
    return DesignGrid(std::move(axes));
}

DesignGrid uniform_midpoint_grid(std::size_t p) {
    std::size_t counts[1] = {p};
    return uniform_midpoint_grid(std::span<const std::size_t>(counts, 1));
}

void DesignDensity::validate() const {
    if (!pdf) throw ConfigError("design density has no evaluator");
    if (!(f_min > 0.0) || !(f_max >= f_min))
        throw ConfigError("design density bounds must satisfy 0 < f_min <= f_max");
    const int samples = 512;
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const double v = pdf(t);
        if (!(v >= f_min - 1e-12) || !(v <= f_max + 1e-12))
            throw ConfigError("design density violates its stated bounds");
    }
    const double mass = integrate(pdf, 0.0, 1.0, 1e-9, 1e-9);
    if (std::abs(mass - 1.0) > 1e-6)
        throw ConfigError("design density does not integrate to 1 on [0,1]");
}

DesignDensity uniform_density() {
    DesignDensity d;
    d.pdf = [](double) { return 1.0; };
    d.f_min = 1.0;
    d.f_max = 1.0;
    d.lipschitz = 0.0;
    d.cdf = [](double x) { return x; };
    return d;
}

namespace {

// CDF(x) = integral of pdf over [0, x]; analytic when available.
double density_cdf(const DesignDensity& d, double x) {
    if (d.cdf) return (*d.cdf)(x);
    return integrate(d.pdf, 0.0, x, 1e-13, 1e-12);
}

// Solve CDF(x) = target on [0,1]. Bisection down to adjacent doubles, then
// snapped to the endpoint with the smaller residual so exact CDFs recover
// representable quantiles exactly.
double quantile_root(const DesignDensity& d, double target) {
    double lo = 0.0, hi = 1.0;
    double flo = 0.0 - target, fhi = 1.0 - target;
    if (flo > 0.0) return 0.0;
    if (fhi < 0.0) return 1.0;
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = density_cdf(d, mid) - target;
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

} // namespace

DesignGrid quantile_design(std::span<const DesignDensity> densities,
                           std::span<const std::size_t> counts) {
    if (densities.size() != counts.size())
        throw ConfigError("quantile_design: one density per axis required");
    std::vector<std::vector<double>> axes;
    axes.reserve(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const std::size_t p = counts[k];
        if (p < 2) throw ConfigError("quantile_design requires at least 2 points per axis");
        densities[k].validate();
        std::vector<double> ax(p);
        for (std::size_t l = 0; l < p; ++l) {
            const double target = (static_cast<double>(l) + 0.5) / static_cast<double>(p);
            ax[l] = quantile_root(densities[k], target);
        }
        axes.push_back(std::move(ax));
    }
    return DesignGrid(std::move(axes));
}

DesignGrid quantile_design(const DesignDensity& density, std::size_t p) {
    const DesignDensity ds[1] = {density};
    const std::size_t cs[1] = {p};
    return quantile_design(std::span<const DesignDensity>(ds, 1),
                           std::span<const std::size_t>(cs, 1));
}

double check_regularity(const DesignGrid& grid,
                        std::span<const double> h_samples,
                        const std::vector<std::vector<double>>& x_samples) {
    if (grid.total_size() == 0) throw ConfigError("check_regularity: empty grid");
    if (h_samples.empty() || x_samples.empty())
        throw ConfigError("check_regularity: sample sets must be non-empty");
    const double p1 = static_cast<double>(grid.total_size());
    double worst = 0.0;
    for (const auto& x : x_samples) {
        if (static_cast<int>(x.size()) != grid.dim())
            throw ConfigError("check_regularity: sample point dimension mismatch");
        for (double h : h_samples) {
            if (!(h > 0.0 && h <= 1.0))
                throw ConfigError("check_regularity: bandwidths must lie in (0,1]");
            const double count = static_cast<double>(grid.count_in_window(x, h));
            const double ratio = count / (std::pow(h, grid.dim()) * p1);
            worst = std::max(worst, ratio);
        }
    }
    return worst;
}

double check_regularity(const DesignGrid& grid) {
    const double p_min = static_cast<double>(grid.min_axis_count());
    std::vector<double> hs;
    for (std::size_t k = 1;; ++k) {
        const double h = static_cast<double>(k) / p_min;
        if (h > 0.5) break;
        hs.push_back(h);
    }
    if (hs.empty()) hs.push_back(0.5);

    const int per_axis = grid.dim() <= 2 ? 21 : 7;
    std::vector<std::vector<double>> xs;
    std::vector<int> counter(static_cast<std::size_t>(grid.dim()), 0);
    while (true) {
        std::vector<double> x(static_cast<std::size_t>(grid.dim()));
        for (int k = 0; k < grid.dim(); ++k) {
            x[static_cast<std::size_t>(k)] =
                static_cast<double>(counter[static_cast<std::size_t>(k)]) / (per_axis - 1);
        }
        xs.push_back(std::move(x));
        int k = grid.dim() - 1;
        while (k >= 0 && ++counter[static_cast<std::size_t>(k)] == per_axis) {
            counter[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return check_regularity(grid, hs, xs);
}

std::string grid_to_json(const DesignGrid& grid) {
    nlohmann::json j;
    j["axes"] = nlohmann::json::array();
    for (int k = 0; k < grid.dim(); ++k) j["axes"].push_back(grid.axis(k));
    return j.dump();
}

DesignGrid grid_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("grid JSON parse error: ") + e.what());
    }
    if (!j.contains("axes") || !j["axes"].is_array())
        throw IoError("grid JSON must contain an \"axes\" array");
    std::vector<std::vector<double>> axes;
    for (const auto& ax : j["axes"]) axes.push_back(ax.get<std::vector<double>>());
    return DesignGrid(std::move(axes));
}

} // namespace fdaderiv
