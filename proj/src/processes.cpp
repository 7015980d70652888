#include "fdaderiv/processes.hpp"

#include "fdaderiv/errors.hpp"
#include "fdaderiv/quadrature.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fdaderiv {

std::string process_id(const ProcessSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BrownianMotion>) return "brownian_motion";
            if constexpr (std::is_same_v<T, FractionalBm>)
                return "fbm(H=" + std::to_string(s.hurst) + ")";
            if constexpr (std::is_same_v<T, RiemannLiouvilleFbm>)
                return "rl_fbm(beta=" + std::to_string(s.beta) + ")";
            if constexpr (std::is_same_v<T, SmoothSine>) return "smooth_sine";
            if constexpr (std::is_same_v<T, IteratedFbm>)
                return "iterated_fbm(H=" + std::to_string(s.hurst) +
                       ",levels=" + std::to_string(s.levels) + ")";
        },
        spec);
}

void validate(const ProcessSpec& spec) {
    if (const auto* f = std::get_if<FractionalBm>(&spec)) {
        if (!(f->hurst > 0.0 && f->hurst < 1.0))
            throw ConfigError("fBm Hurst parameter must lie in (0,1)");
    } else if (const auto* r = std::get_if<RiemannLiouvilleFbm>(&spec)) {
        if (!(r->beta > 0.0)) throw ConfigError("Riemann-Liouville order must be positive");
    } else if (const auto* it = std::get_if<IteratedFbm>(&spec)) {
        if (!(it->hurst > 0.0 && it->hurst < 1.0))
            throw ConfigError("fBm Hurst parameter must lie in (0,1)");
        if (it->levels < 1) throw ConfigError("iterated fBm needs levels >= 1");
    }
}

double fbm_covariance(double hurst, double s, double t) {
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double rl_fbm_covariance(double beta, double s, double t) {
    if (!(beta > 0.0)) throw ConfigError("Riemann-Liouville order must be positive");
    if (s > t) std::swap(s, t);
    if (s <= 0.0) return 0.0;
    const double a = beta - 0.5;
    const double delta = t - s;
    if (delta == 0.0) return std::pow(s, 2.0 * beta) / (2.0 * beta);
    if (a == 0.0) return s;
    if (a > 0.0) {
        // gamma(s,t) = int_0^s v^a (delta + v)^a dv, smooth integrand.
        return integrate([&](double v) { return std::pow(v, a) * std::pow(delta + v, a); },
                         0.0, s, 1e-12, 1e-10);
    }
    // a < 0: substitute w = v^{a+1}; the endpoint singularity disappears.
    const double q = a + 1.0;
    const double upper = std::pow(s, q);
    return integrate(
               [&](double w) { return std::pow(delta + std::pow(w, 1.0 / q), a); },
               0.0, upper, 1e-12, 1e-10) /
           q;
}

double smooth_sine_covariance(double s, double t) {
    return (4.0 / 9.0) * std::sin(M_PI * s) * std::sin(M_PI * t) +
           (8.0 / 9.0) * std::cos(M_PI * s) * std::cos(M_PI * t);
}

double smooth_sine_derivative_covariance(double s, double t) {
    const double pi2 = M_PI * M_PI;
    return pi2 * ((4.0 / 9.0) * std::cos(M_PI * s) * std::cos(M_PI * t) +
                  (8.0 / 9.0) * std::sin(M_PI * s) * std::sin(M_PI * t));
}

double process_covariance(const ProcessSpec& spec, double s, double t) {
    if (std::holds_alternative<BrownianMotion>(spec)) return std::min(s, t);
    if (const auto* f = std::get_if<FractionalBm>(&spec)) return fbm_covariance(f->hurst, s, t);
    if (const auto* r = std::get_if<RiemannLiouvilleFbm>(&spec))
        return rl_fbm_covariance(r->beta, s, t);
    if (std::holds_alternative<SmoothSine>(spec)) return smooth_sine_covariance(s, t);
    throw NumericalError("no analytic covariance available for " + process_id(spec));
}

namespace {

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("path grid is empty");
    double prev = -1.0;
    for (double t : grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("path grid points must lie in [0,1]");
        if (!(t > prev)) throw ConfigError("path grid must be strictly increasing");
        prev = t;
    }
}

Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd cov, const std::string& what) {
    const double scale = cov.diagonal().mean();
    const double jitters[] = {0.0, 1e-12, 1e-10, 1e-8};
    for (double j : jitters) {
        Eigen::MatrixXd c = cov;
        if (j > 0.0) c.diagonal().array() += j * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericalError("covariance factorization failed for " + what +
                         " even with diagonal jitter up to 1e-8; check the grid for "
                         "duplicate points or increase the jitter");
}

void cumulative_trapezoid(const std::vector<double>& grid, std::span<double> values) {
    double acc = 0.0;
    double prev_v = values[0];
    values[0] = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = values[i];
        acc += 0.5 * (prev_v + v) * (grid[i] - grid[i - 1]);
        values[i] = acc;
        prev_v = v;
    }
}

} // namespace

PathGenerator::PathGenerator(ProcessSpec spec, std::vector<double> grid)
    : spec_(std::move(spec)), grid_(std::move(grid)) {
    validate(spec_);
    validate_grid(grid_);
    const std::size_t p = grid_.size();

    if (std::holds_alternative<BrownianMotion>(spec_)) {
        step_sd_.resize(p);
        double prev = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            step_sd_[i] = std::sqrt(grid_[i] - prev);
            prev = grid_[i];
        }
        return;
    }
    if (std::holds_alternative<SmoothSine>(spec_)) {
        sin_table_.resize(p);
        cos_table_.resize(p);
        for (std::size_t i = 0; i < p; ++i) {
            sin_table_[i] = std::sin(M_PI * grid_[i]);
            cos_table_[i] = std::cos(M_PI * grid_[i]);
        }
        return;
    }

    double hurst = 0.0;
    bool rl = false;
    double beta = 0.0;
    if (const auto* f = std::get_if<FractionalBm>(&spec_)) {
        hurst = f->hurst;
    } else if (const auto* r = std::get_if<RiemannLiouvilleFbm>(&spec_)) {
        rl = true;
        beta = r->beta;
    } else if (const auto* it = std::get_if<IteratedFbm>(&spec_)) {
        hurst = it->hurst;
        iterate_levels_ = it->levels;
    }

    for (std::size_t i = 0; i < p; ++i) {
        if (grid_[i] > 0.0) active_.push_back(i); // variance vanishes only at t = 0
    }
    const Eigen::Index na = static_cast<Eigen::Index>(active_.size());
    Eigen::MatrixXd cov(na, na);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double ti = grid_[active_[static_cast<std::size_t>(i)]];
            const double tj = grid_[active_[static_cast<std::size_t>(j)]];
            const double c = rl ? rl_fbm_covariance(beta, ti, tj) : fbm_covariance(hurst, ti, tj);
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    factor_ = cholesky_with_jitter(std::move(cov), process_id(spec_));
    scratch_.resize(active_.size());
}

void PathGenerator::sample_values(GaussianStream& gs, std::span<double> out) const {
    const std::size_t p = grid_.size();
    if (out.size() != p) throw ConfigError("output span size does not match grid");

    if (std::holds_alternative<BrownianMotion>(spec_)) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            acc += step_sd_[i] * gs.next();
            out[i] = acc;
        }
        return;
    }
    if (std::holds_alternative<SmoothSine>(spec_)) {
        const double a = (2.0 / 3.0) * gs.next();
        const double b = (std::sqrt(8.0) / 3.0) * gs.next();
        for (std::size_t i = 0; i < p; ++i) out[i] = a * sin_table_[i] + b * cos_table_[i];
        return;
    }

    // fBm / RL-fBm / iterated fBm: dense factor over the active points.
    Eigen::VectorXd g(static_cast<Eigen::Index>(active_.size()));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gs.next();
    const Eigen::VectorXd z = factor_.triangularView<Eigen::Lower>() * g;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < active_.size(); ++i) {
        out[active_[i]] = z[static_cast<Eigen::Index>(i)];
    }
    for (int level = 0; level < iterate_levels_; ++level) {
        cumulative_trapezoid(grid_, out);
    }
}

PathSample PathGenerator::sample(std::uint64_t seed) const {
    PathSample path;
    path.grid = grid_;
    path.spec = spec_;
    path.seed = seed;
    path.values.resize(grid_.size());
    GaussianStream gs(seed);
    sample_values(gs, path.values);
    return path;
}

PathSample sample_process(const ProcessSpec& spec, std::vector<double> grid, std::uint64_t seed) {
    return PathGenerator(spec, std::move(grid)).sample(seed);
}

PathSample sample_fbm(double hurst, std::vector<double> grid, std::uint64_t seed) {
    return sample_process(FractionalBm{hurst}, std::move(grid), seed);
}

PathSample sample_rl_fbm(double beta, std::vector<double> grid, std::uint64_t seed) {
    return sample_process(RiemannLiouvilleFbm{beta}, std::move(grid), seed);
}

PathSample sample_smooth_sine(std::vector<double> grid, std::uint64_t seed) {
    return sample_process(SmoothSine{}, std::move(grid), seed);
}

PathSample sample_iterated_fbm(double hurst, int levels, std::vector<double> grid,
                               std::uint64_t seed) {
    return sample_process(IteratedFbm{hurst, levels}, std::move(grid), seed);
}

void write_path_csv(const PathSample& path, std::ostream& out) {
    out << "t,value\n";
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        out << path.grid[i] << "," << path.values[i] << "\n";
    }
}

HolderEstimate empirical_holder_exponent(const PathSample& path) {
    const std::size_t p = path.grid.size();
    if (p < 64) throw ConfigError("Hoelder exponent estimation needs at least 64 grid points");

    std::vector<double> log_lag, log_inc;
    for (std::size_t lag = 1; lag <= (p - 1) / 4; lag *= 2) {
        double max_inc = 0.0;
        std::vector<double> lags;
        lags.reserve(p - lag);
        for (std::size_t i = 0; i + lag < p; ++i) {
            max_inc = std::max(max_inc, std::abs(path.values[i + lag] - path.values[i]));
            lags.push_back(path.grid[i + lag] - path.grid[i]);
        }
        if (max_inc == 0.0) throw NumericalError("Hoelder exponent undefined for a constant path");
        std::nth_element(lags.begin(), lags.begin() + static_cast<std::ptrdiff_t>(lags.size() / 2),
                         lags.end());
        const double med_lag = lags[lags.size() / 2];
        // Increments at lag L decorrelate over a distance of about L, so the
        // extreme-value factor uses the non-overlapping block count.
        const double n_eff = std::max(2.0, static_cast<double>(p - 1) / static_cast<double>(lag));
        log_inc.push_back(std::log(max_inc / std::sqrt(2.0 * std::log(n_eff))));
        log_lag.push_back(std::log(med_lag));
    }
    const std::size_t k = log_lag.size();
    if (k < 3) throw ConfigError("not enough dyadic lags for exponent regression");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += log_lag[i];
        my += log_inc[i];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (log_lag[i] - mx) * (log_lag[i] - mx);
        sxy += (log_lag[i] - mx) * (log_inc[i] - my);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = log_inc[i] - my - slope * (log_lag[i] - mx);
        rss += r * r;
    }
    HolderEstimate est;
    est.exponent = slope;
    est.std_error = std::sqrt(rss / (static_cast<double>(k - 2) * sxx));
    est.lags = static_cast<int>(k);
    return est;
}

} // namespace fdaderiv
