#pragma once

#include "fdaderiv/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace fdaderiv {

struct BrownianMotion {};
struct FractionalBm {
    double hurst;
};
struct RiemannLiouvilleFbm {
    double beta;
};
struct SmoothSine {};
struct IteratedFbm {
    double hurst;
    int levels;
};

using ProcessSpec =
    std::variant<BrownianMotion, FractionalBm, RiemannLiouvilleFbm, SmoothSine, IteratedFbm>;

std::string process_id(const ProcessSpec& spec);
void validate(const ProcessSpec& spec);

/// Analytic covariance kernels.
double fbm_covariance(double hurst, double s, double t);
double rl_fbm_covariance(double beta, double s, double t); // quadrature-backed
double smooth_sine_covariance(double s, double t);
/// E[Z'(s) Z'(t)] for the smooth sine process.
double smooth_sine_derivative_covariance(double s, double t);
double process_covariance(const ProcessSpec& spec, double s, double t);

struct PathSample {
    std::vector<double> grid;
    std::vector<double> values;
    ProcessSpec spec;
    std::uint64_t seed = 0;
};

/// Exact path sampler for a fixed (spec, grid) pair. The covariance
/// factorization (dense Cholesky for fBm / RL-fBm, closed-form increment
/// factor for Brownian motion, the two-term expansion for the smooth sine
/// process) is computed once and reused across draws; sampling is a
/// deterministic function of the stream state.
class PathGenerator {
public:
    PathGenerator(ProcessSpec spec, std::vector<double> grid);

    const std::vector<double>& grid() const { return grid_; }
    const ProcessSpec& spec() const { return spec_; }

    PathSample sample(std::uint64_t seed) const;
    void sample_values(GaussianStream& gs, std::span<double> out) const;

private:
    ProcessSpec spec_;
    std::vector<double> grid_;
    // Brownian motion: per-step standard deviations.
    std::vector<double> step_sd_;
    // Smooth sine: cached sin(pi t), cos(pi t).
    std::vector<double> sin_table_, cos_table_;
    // fBm / RL-fBm: dense lower Cholesky factor over positive-variance points.
    Eigen::MatrixXd factor_;
    std::vector<std::size_t> active_; // indices with positive variance
    // Iterated fBm: inner generator.
    std::vector<double> scratch_;
    int iterate_levels_ = 0;
};

PathSample sample_fbm(double hurst, std::vector<double> grid, std::uint64_t seed);
PathSample sample_rl_fbm(double beta, std::vector<double> grid, std::uint64_t seed);
PathSample sample_smooth_sine(std::vector<double> grid, std::uint64_t seed);
PathSample sample_iterated_fbm(double hurst, int levels, std::vector<double> grid,
                               std::uint64_t seed);
PathSample sample_process(const ProcessSpec& spec, std::vector<double> grid, std::uint64_t seed);

void write_path_csv(const PathSample& path, std::ostream& out);

/// Dyadic-lag regression estimate of the path's Hoelder exponent: slope of
/// log max-increment (normalized by the extreme-value factor sqrt(2 log n))
/// against log lag. Requires >= 64 grid points; throws NumericalError for a
/// constant path.
struct HolderEstimate {
    double exponent = 0.0;
    double std_error = 0.0;
    int lags = 0;
};

HolderEstimate empirical_holder_exponent(const PathSample& path);

} // namespace fdaderiv
