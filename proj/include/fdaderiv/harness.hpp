#pragma once

#include "fdaderiv/dataset.hpp"
#include "fdaderiv/estimator.hpp"
#include "fdaderiv/processes.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace fdaderiv {

/// Deterministic mean function with analytic derivatives. `spec` is the JSON
/// form used for config round-trips.
struct MeanFunction {
    std::string id;
    nlohmann::json spec;
    std::function<double(double, int)> deriv; // deriv(x, 0) is the value

    double value(double x) const { return deriv(x, 0); }
    double operator()(double x) const { return deriv(x, 0); }
};

MeanFunction zero_mean();
/// mu(x) = sin(3 pi (2x-1)) exp(-2 (2x-1)^2); analytic first derivative.
MeanFunction damped_sine_mean();
MeanFunction polynomial_mean(std::vector<double> coeffs);
/// mu(x) = amplitude * sin(2 pi cycles x), derivatives of every order.
MeanFunction sine_mean(double amplitude = 1.0, int cycles = 1);
MeanFunction mean_from_json(const nlohmann::json& spec);
nlohmann::json mean_to_json(const MeanFunction& mean);

enum class NoiseDist { gaussian, uniform };

struct NoiseSpec {
    double sigma = 0.0;
    NoiseDist dist = NoiseDist::gaussian;
};

/// Bandwidth validity guards h in (c / p_min, h0]. The theory only asserts
/// existence of suitable constants; these are configurable.
struct ValidityGuards {
    double c = 2.0;
    double h0 = 0.5;

    bool valid(double h, std::size_t p_min) const {
        return h > c / static_cast<double>(p_min) && h <= h0;
    }
};

/// Configuration of one simulation experiment (univariate design).
struct SimConfig {
    MeanFunction mean = damped_sine_mean();
    std::optional<ProcessSpec> process = BrownianMotion{}; // nullopt: no process term
    NoiseSpec noise{0.5, NoiseDist::gaussian};
    int n = 10;
    std::size_t p = 101;
    std::vector<double> h_grid = {0.1};
    int s = 1;
    int m = 3;
    int replicates = 1;
    std::uint64_t seed = 1;
    bool trim = true;
    ValidityGuards guards;

    /// Throws ConfigError (naming the violated bound) on invalid settings.
    void validate() const;
    DesignGrid make_grid() const { return uniform_midpoint_grid(p); }
};

nlohmann::json config_to_json(const SimConfig& cfg);
SimConfig config_from_json(const nlohmann::json& j);

/// Y_{i,j} = mu(x_j) + Z_i(x_j) + eps_{i,j}; deterministic in (seed, replicate).
FunctionalDataset simulate_dataset(const SimConfig& cfg, int replicate);

/// Row means of the latent components for one replicate (same draws as
/// simulate_dataset, without materializing the n x p matrix).
struct ComponentMeans {
    Eigen::VectorXd process; // bar{Z}(x_j)
    Eigen::VectorXd noise;   // bar{eps}_j
};
ComponentMeans simulate_component_means(const SimConfig& cfg, int replicate);

/// Sup-norms over the evaluation interval of the error components:
/// bias (deterministic), noise, process, and the directly computed total.
struct ErrorDecomposition {
    double sup_bias = 0.0;
    double sup_noise = 0.0;
    double sup_process = 0.0;
    double sup_total = 0.0;
    double identity_gap = 0.0; // max |bias + noise + process - total| pointwise
    double h = 0.0;
    bool trimmed = true;
};

ErrorDecomposition error_decomposition(const SimConfig& cfg, int replicate, double h);

/// Mean sup-norm error versus bandwidth, with per-component means and the
/// argmin bandwidth (ties toward smaller h). Degenerate bandwidths are
/// excluded; if all are degenerate a NumericalError is thrown.
struct SweepRow {
    double h = 0.0;
    bool degenerate = false;
    double mean_sup_total = 0.0;
    double sup_bias = 0.0;
    double mean_sup_noise = 0.0;
    double mean_sup_process = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double best_h = 0.0;
};

SweepResult bandwidth_sweep(const SimConfig& cfg, unsigned workers = 1);
void write_sweep_csv(const SimConfig& cfg, const SweepResult& sweep, std::ostream& out);

/// Rough (Brownian) versus smooth (sine process) scaling of the process
/// error term sum_j w_j bar{Z}(x_j), as mean sup-norms over replicates.
enum class ProcessKind { rough, smooth };

struct RateRow {
    int n = 0;
    double h = 0.0;
    double mean_sup = 0.0; // E || process error ||_inf
    double scaled = 0.0;   // sqrt(n h) * mean (rough), sqrt(n) * mean (smooth)
};

struct RateOptions {
    int s = 1;
    int m = 3;
    /// The sup-norm is taken over the fixed interior interval
    /// [eval_trim, 1 - eval_trim]; the boundary bands, where one-sided
    /// derivative fits dominate the statistic, are excluded.
    double eval_trim = 0.05;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

std::vector<RateRow> rate_table(ProcessKind kind, std::span<const int> n_list, std::size_t p,
                                int replicates, std::span<const double> h_list,
                                const RateOptions& options = {});
void write_rate_csv(ProcessKind kind, std::span<const RateRow> rows, std::ostream& out);
std::string rate_summary_json(ProcessKind kind, std::span<const RateRow> rows);

/// Canonical rough/smooth scaling experiment: p = 800, n in {10,...,1600}
/// with the associated bandwidth row.
struct RatePreset {
    std::vector<int> n_list;
    std::vector<double> h_list;
    std::size_t p = 800;
    int replicates = 1000;
};
RatePreset table1_preset();

/// Distribution of sqrt(n) (mu_hat'(x0) - mu'(x0)) for the smooth sine
/// process: empirical moments plus a Kolmogorov-Smirnov distance to the
/// limiting normal with variance E[Z'(x0)^2].
struct CltOptions {
    MeanFunction mean = damped_sine_mean();
    /// Defaults to the smooth sine process (smooth paths, as the limit
    /// requires); nullopt runs the degenerate no-process smoke case.
    std::optional<ProcessSpec> process = SmoothSine{};
    double sigma = 0.1;
    NoiseDist dist = NoiseDist::gaussian;
    int s = 1;
    int m = 3;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    // Window-shape constants (existential in the theory; user-supplied here).
    double window_c1 = 0.2;
    double window_c2 = 5.0;
    double window_delta = 1.1;
};

struct CltResult {
    double mean = 0.0;
    double variance = 0.0;
    double target_variance = 0.0;
    double ks_statistic = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    bool window_ok = false;
};

CltResult clt_experiment(int n, std::size_t p, int replicates, double h, double x0,
                         const CltOptions& options = {});

double normal_cdf(double x, double variance);

} // namespace fdaderiv
