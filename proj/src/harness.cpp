#include "fdaderiv/harness.hpp"

#include "fdaderiv/csv.hpp"
#include "fdaderiv/errors.hpp"
#include "fdaderiv/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace fdaderiv {

MeanFunction zero_mean() {
    return {"zero", "zero", [](double, int) { return 0.0; }};
}

MeanFunction damped_sine_mean() {
    return {"damped_sine", "damped_sine", [](double x, int s) {
                const double y = 2.0 * x - 1.0;
                const double env = std::exp(-2.0 * y * y);
                if (s == 0) return std::sin(3.0 * M_PI * y) * env;
                if (s == 1) {
                    return (6.0 * M_PI * std::cos(3.0 * M_PI * y) -
                            4.0 * y * std::sin(3.0 * M_PI * y)) *
                           env;
                }
                throw ConfigError("damped_sine mean provides derivatives up to order 1");
            }};
}

MeanFunction polynomial_mean(std::vector<double> coeffs) {
    nlohmann::json spec;
    spec["poly"] = coeffs;
    return {"poly", std::move(spec), [c = std::move(coeffs)](double x, int s) {
                double acc = 0.0;
                double xp = 1.0;
                for (std::size_t k = 0; k < c.size(); ++k) {
                    const int ki = static_cast<int>(k);
                    if (ki >= s) {
                        double factor = 1.0;
                        for (int j = 0; j < s; ++j) factor *= static_cast<double>(ki - j);
                        acc += c[k] * factor * xp;
                        xp *= x;
                    }
                }
                return acc;
            }};
}

MeanFunction sine_mean(double amplitude, int cycles) {
    if (cycles < 1) throw ConfigError("sine mean needs cycles >= 1");
    nlohmann::json spec;
    spec["sine"] = {{"amplitude", amplitude}, {"cycles", cycles}};
    return {"sine", std::move(spec), [amplitude, cycles](double x, int s) {
                const double w = 2.0 * M_PI * cycles;
                return amplitude * std::pow(w, s) * std::sin(w * x + 0.5 * M_PI * s);
            }};
}

MeanFunction mean_from_json(const nlohmann::json& spec) {
    if (spec.is_string()) {
        const std::string id = spec.get<std::string>();
        if (id == "zero") return zero_mean();
        if (id == "damped_sine") return damped_sine_mean();
        if (id == "sine") return sine_mean();
        throw ConfigError("unknown mean function id: " + id);
    }
    if (spec.is_object() && spec.contains("poly")) {
        return polynomial_mean(spec.at("poly").get<std::vector<double>>());
    }
    if (spec.is_object() && spec.contains("sine")) {
        const auto& s = spec.at("sine");
        return sine_mean(s.value("amplitude", 1.0), s.value("cycles", 1));
    }
    throw ConfigError(
        "mean must be \"zero\", \"damped_sine\", \"sine\", {\"poly\": [...]} or {\"sine\": {...}}");
}

nlohmann::json mean_to_json(const MeanFunction& mean) {
    return mean.spec;
}

namespace {

nlohmann::json process_to_json(const std::optional<ProcessSpec>& spec) {
    nlohmann::json j;
    if (!spec) {
        j["kind"] = "none";
        return j;
    }
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BrownianMotion>) {
                j["kind"] = "brownian_motion";
            } else if constexpr (std::is_same_v<T, FractionalBm>) {
                j["kind"] = "fbm";
                j["hurst"] = s.hurst;
            } else if constexpr (std::is_same_v<T, RiemannLiouvilleFbm>) {
                j["kind"] = "rl_fbm";
                j["beta"] = s.beta;
            } else if constexpr (std::is_same_v<T, SmoothSine>) {
                j["kind"] = "smooth_sine";
            } else if constexpr (std::is_same_v<T, IteratedFbm>) {
                j["kind"] = "iterated_fbm";
                j["hurst"] = s.hurst;
                j["levels"] = s.levels;
            }
        },
        *spec);
    return j;
}

std::optional<ProcessSpec> process_from_json(const nlohmann::json& j) {
    const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
    if (kind == "none") return std::nullopt;
    if (kind == "brownian_motion") return ProcessSpec{BrownianMotion{}};
    if (kind == "fbm") return ProcessSpec{FractionalBm{j.at("hurst").get<double>()}};
    if (kind == "rl_fbm") return ProcessSpec{RiemannLiouvilleFbm{j.at("beta").get<double>()}};
    if (kind == "smooth_sine") return ProcessSpec{SmoothSine{}};
    if (kind == "iterated_fbm")
        return ProcessSpec{IteratedFbm{j.at("hurst").get<double>(), j.at("levels").get<int>()}};
    throw ConfigError("unknown process kind: " + kind);
}

} // namespace

void SimConfig::validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (p < 2) throw ConfigError("p must be >= 2");
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (!(noise.sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
    if (s < 0 || m < s) throw ConfigError("derivative order s must satisfy 0 <= s <= m");
    if (h_grid.empty()) throw ConfigError("bandwidth grid must be non-empty");
    for (double h : h_grid) {
        if (!guards.valid(h, p)) {
            std::ostringstream os;
            os << "bandwidth " << h << " outside the valid range (c/p, h0] = ("
               << guards.c / static_cast<double>(p) << ", " << guards.h0 << "]";
            throw ConfigError(os.str());
        }
    }
    if (process) fdaderiv::validate(*process);
}

nlohmann::json config_to_json(const SimConfig& cfg) {
    nlohmann::json j;
    j["mean"] = mean_to_json(cfg.mean);
    j["process"] = process_to_json(cfg.process);
    j["noise"] = {{"sigma", cfg.noise.sigma},
                  {"dist", cfg.noise.dist == NoiseDist::gaussian ? "gaussian" : "uniform"}};
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["h_grid"] = cfg.h_grid;
    j["s"] = cfg.s;
    j["m"] = cfg.m;
    j["replicates"] = cfg.replicates;
    j["seed"] = cfg.seed;
    j["trim"] = cfg.trim;
    j["guards"] = {{"c", cfg.guards.c}, {"h0", cfg.guards.h0}};
    return j;
}

SimConfig config_from_json(const nlohmann::json& j) {
    SimConfig cfg;
    try {
        cfg.mean = mean_from_json(j.at("mean"));
        cfg.process = process_from_json(j.at("process"));
        if (j.contains("noise")) {
            cfg.noise.sigma = j["noise"].value("sigma", 0.0);
            const std::string dist = j["noise"].value("dist", "gaussian");
            if (dist == "gaussian") {
                cfg.noise.dist = NoiseDist::gaussian;
            } else if (dist == "uniform") {
                cfg.noise.dist = NoiseDist::uniform;
            } else {
                throw ConfigError("unknown noise dist: " + dist);
            }
        } else {
            cfg.noise = NoiseSpec{0.0, NoiseDist::gaussian};
        }
        cfg.n = j.at("n").get<int>();
        cfg.p = j.at("p").get<std::size_t>();
        cfg.h_grid = j.at("h_grid").get<std::vector<double>>();
        cfg.s = j.value("s", 1);
        cfg.m = j.value("m", 3);
        cfg.replicates = j.value("replicates", 1);
        cfg.seed = j.value("seed", std::uint64_t{1});
        cfg.trim = j.value("trim", true);
        if (j.contains("guards")) {
            cfg.guards.c = j["guards"].value("c", 2.0);
            cfg.guards.h0 = j["guards"].value("h0", 0.5);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

constexpr std::uint64_t kReplicateStream = 0x5245504cULL; // stream domain tags
constexpr std::uint64_t kRateStream = 0x52415445ULL;

void add_noise_row(GaussianStream& gs, const NoiseSpec& noise, std::span<double> row) {
    if (noise.sigma == 0.0) return;
    if (noise.dist == NoiseDist::gaussian) {
        for (double& v : row) v += noise.sigma * gs.next();
    } else {
        const double half_width = noise.sigma * std::sqrt(3.0);
        for (double& v : row) v += half_width * (2.0 * gs.uniform01() - 1.0);
    }
}

} // namespace

FunctionalDataset simulate_dataset(const SimConfig& cfg, int replicate) {
    cfg.validate();
    const DesignGrid grid = cfg.make_grid();
    const std::size_t p1 = grid.total_size();
    Eigen::MatrixXd values(cfg.n, static_cast<Eigen::Index>(p1));
    Eigen::VectorXd mu(static_cast<Eigen::Index>(p1));
    for (std::size_t j = 0; j < p1; ++j) mu[static_cast<Eigen::Index>(j)] = cfg.mean.value(grid.axis(0)[j]);

    GaussianStream gs(mix_seed(cfg.seed, kReplicateStream, static_cast<std::uint64_t>(replicate)));
    std::vector<double> row(p1, 0.0);
    if (cfg.process) {
        const PathGenerator gen(*cfg.process, grid.axis(0));
        for (int i = 0; i < cfg.n; ++i) {
            gen.sample_values(gs, row);
            for (std::size_t j = 0; j < p1; ++j) {
                values(i, static_cast<Eigen::Index>(j)) = mu[static_cast<Eigen::Index>(j)] + row[j];
            }
        }
    } else {
        for (int i = 0; i < cfg.n; ++i) values.row(i) = mu.transpose();
    }
    for (int i = 0; i < cfg.n; ++i) {
        for (std::size_t j = 0; j < p1; ++j) row[j] = values(i, static_cast<Eigen::Index>(j));
        add_noise_row(gs, cfg.noise, row);
        for (std::size_t j = 0; j < p1; ++j) values(i, static_cast<Eigen::Index>(j)) = row[j];
    }
    return FunctionalDataset(grid, std::move(values));
}

ComponentMeans simulate_component_means(const SimConfig& cfg, int replicate) {
    cfg.validate();
    const DesignGrid grid = cfg.make_grid();
    const std::size_t p1 = grid.total_size();
    ComponentMeans cm;
    cm.process = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p1));
    cm.noise = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p1));

    GaussianStream gs(mix_seed(cfg.seed, kReplicateStream, static_cast<std::uint64_t>(replicate)));
    std::vector<double> row(p1, 0.0);
    if (cfg.process) {
        const PathGenerator gen(*cfg.process, grid.axis(0));
        for (int i = 0; i < cfg.n; ++i) {
            gen.sample_values(gs, row);
            for (std::size_t j = 0; j < p1; ++j) cm.process[static_cast<Eigen::Index>(j)] += row[j];
        }
        cm.process /= static_cast<double>(cfg.n);
    }
    if (cfg.noise.sigma > 0.0) {
        for (int i = 0; i < cfg.n; ++i) {
            std::fill(row.begin(), row.end(), 0.0);
            add_noise_row(gs, cfg.noise, row);
            for (std::size_t j = 0; j < p1; ++j) cm.noise[static_cast<Eigen::Index>(j)] += row[j];
        }
        cm.noise /= static_cast<double>(cfg.n);
    }
    return cm;
}

namespace {

// Weights, deterministic bias and derivative targets at the evaluation
// points of one (grid, h) pair; shared by the replicate loops.
struct EstimatorPlan {
    std::vector<std::size_t> eval_flat;
    std::vector<WeightSet> weights;
    Eigen::VectorXd bias;   // sum_j w_j mu(x_j) - mu^(s)(x)
    Eigen::VectorXd target; // mu^(s)(x)
};

EstimatorPlan make_plan(const DesignGrid& grid, const MeanFunction& mean, int s, int m,
                        double h, double eval_trim, const Kernel& kernel) {
    EstimatorPlan plan;
    plan.eval_flat = trimmed_flat_indices(grid, eval_trim);
    if (plan.eval_flat.empty())
        throw ConfigError("no evaluation points inside the trimmed interval");

    const std::size_t p1 = grid.total_size();
    Eigen::VectorXd mu(static_cast<Eigen::Index>(p1));
    for (std::size_t j = 0; j < p1; ++j) mu[static_cast<Eigen::Index>(j)] = mean.value(grid.axis(0)[j]);

    const MultiIndex si = MultiIndex::scalar(s);
    const Eigen::Index ne = static_cast<Eigen::Index>(plan.eval_flat.size());
    plan.bias.resize(ne);
    plan.target.resize(ne);
    plan.weights.reserve(plan.eval_flat.size());
    for (Eigen::Index q = 0; q < ne; ++q) {
        const double x = grid.axis(0)[plan.eval_flat[static_cast<std::size_t>(q)]];
        const double pt[1] = {x};
        plan.weights.push_back(
            local_poly_weights(grid, std::span<const double>(pt, 1), h, si, m, kernel));
        plan.target[q] = mean.deriv(x, s);
        plan.bias[q] = plan.weights.back().apply(mu) - plan.target[q];
    }
    return plan;
}

double sup_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

} // namespace

ErrorDecomposition error_decomposition(const SimConfig& cfg, int replicate, double h) {
    cfg.validate();
    if (!cfg.guards.valid(h, cfg.p)) {
        std::ostringstream os;
        os << "bandwidth " << h << " outside the valid range (c/p, h0] = ("
           << cfg.guards.c / static_cast<double>(cfg.p) << ", " << cfg.guards.h0 << "]";
        throw ConfigError(os.str());
    }
    const DesignGrid grid = cfg.make_grid();
    const Kernel kernel = epanechnikov_product_kernel(1);
    const EstimatorPlan plan =
        make_plan(grid, cfg.mean, cfg.s, cfg.m, h, cfg.trim ? h : 0.0, kernel);
    const ComponentMeans cm = simulate_component_means(cfg, replicate);

    const Eigen::Index ne = static_cast<Eigen::Index>(plan.weights.size());
    Eigen::VectorXd noise_term(ne), process_term(ne), total(ne);
    const std::size_t p1 = grid.total_size();
    Eigen::VectorXd ybar(static_cast<Eigen::Index>(p1));
    for (std::size_t j = 0; j < p1; ++j) {
        ybar[static_cast<Eigen::Index>(j)] = cfg.mean.value(grid.axis(0)[j]) +
                                             cm.process[static_cast<Eigen::Index>(j)] +
                                             cm.noise[static_cast<Eigen::Index>(j)];
    }
    for (Eigen::Index q = 0; q < ne; ++q) {
        noise_term[q] = plan.weights[static_cast<std::size_t>(q)].apply(cm.noise);
        process_term[q] = plan.weights[static_cast<std::size_t>(q)].apply(cm.process);
        total[q] = plan.weights[static_cast<std::size_t>(q)].apply(ybar) - plan.target[q];
    }

    ErrorDecomposition dec;
    dec.h = h;
    dec.trimmed = cfg.trim;
    dec.sup_bias = sup_abs(plan.bias);
    dec.sup_noise = sup_abs(noise_term);
    dec.sup_process = sup_abs(process_term);
    dec.sup_total = sup_abs(total);
    dec.identity_gap = (plan.bias + noise_term + process_term - total).cwiseAbs().maxCoeff();
    return dec;
}

SweepResult bandwidth_sweep(const SimConfig& cfg, unsigned workers) {
    cfg.validate();
    const DesignGrid grid = cfg.make_grid();
    const Kernel kernel = epanechnikov_product_kernel(1);

    std::vector<double> hs = cfg.h_grid;
    std::sort(hs.begin(), hs.end());
    SweepResult result;
    result.rows.resize(hs.size());

    std::vector<EstimatorPlan> plans(hs.size());
    std::vector<bool> valid(hs.size(), false);
    bool any_valid = false;
    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        result.rows[hi].h = hs[hi];
        try {
            plans[hi] =
                make_plan(grid, cfg.mean, cfg.s, cfg.m, hs[hi], cfg.trim ? hs[hi] : 0.0, kernel);
            valid[hi] = true;
            any_valid = true;
        } catch (const NumericalError&) {
            result.rows[hi].degenerate = true;
        } catch (const ConfigError&) {
            result.rows[hi].degenerate = true;
        }
    }
    if (!any_valid) throw NumericalError("every bandwidth in the sweep grid is degenerate");

    const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
    std::vector<std::vector<double>> sup_total(hs.size(), std::vector<double>(reps, 0.0));
    std::vector<std::vector<double>> sup_noise(hs.size(), std::vector<double>(reps, 0.0));
    std::vector<std::vector<double>> sup_process(hs.size(), std::vector<double>(reps, 0.0));

    parallel_for(reps, workers, [&](std::size_t rep) {
        const ComponentMeans cm = simulate_component_means(cfg, static_cast<int>(rep));
        for (std::size_t hi = 0; hi < hs.size(); ++hi) {
            if (!valid[hi]) continue;
            const EstimatorPlan& plan = plans[hi];
            double st = 0.0, sn = 0.0, sp = 0.0;
            for (std::size_t q = 0; q < plan.weights.size(); ++q) {
                const double noise_term = plan.weights[q].apply(cm.noise);
                const double process_term = plan.weights[q].apply(cm.process);
                const double total =
                    plan.bias[static_cast<Eigen::Index>(q)] + noise_term + process_term;
                st = std::max(st, std::abs(total));
                sn = std::max(sn, std::abs(noise_term));
                sp = std::max(sp, std::abs(process_term));
            }
            sup_total[hi][rep] = st;
            sup_noise[hi][rep] = sn;
            sup_process[hi][rep] = sp;
        }
    });

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        SweepRow& row = result.rows[hi];
        if (row.degenerate) continue;
        row.mean_sup_total = pairwise_mean(sup_total[hi]);
        row.sup_bias = sup_abs(plans[hi].bias);
        row.mean_sup_noise = pairwise_mean(sup_noise[hi]);
        row.mean_sup_process = pairwise_mean(sup_process[hi]);
        if (row.mean_sup_total < best) {
            best = row.mean_sup_total;
            result.best_h = row.h;
        }
    }
    return result;
}

void write_sweep_csv(const SimConfig& cfg, const SweepResult& sweep, std::ostream& out) {
    out << "p,n,h,component,value\n";
    for (const SweepRow& row : sweep.rows) {
        if (row.degenerate) continue;
        const auto emit = [&](const char* component, double value) {
            out << cfg.p << "," << cfg.n << "," << format_double(row.h) << "," << component << ","
                << format_double(value) << "\n";
        };
        emit("bias", row.sup_bias);
        emit("noise", row.mean_sup_noise);
        emit("process", row.mean_sup_process);
        emit("total", row.mean_sup_total);
    }
}

std::vector<RateRow> rate_table(ProcessKind kind, std::span<const int> n_list, std::size_t p,
                                int replicates, std::span<const double> h_list,
                                const RateOptions& options) {
    if (n_list.size() != h_list.size())
        throw ConfigError("rate table needs one bandwidth per n");
    if (replicates < 1) throw ConfigError("replicates must be >= 1");

    const DesignGrid grid = uniform_midpoint_grid(p);
    const Kernel kernel = epanechnikov_product_kernel(1);
    const ProcessSpec spec =
        kind == ProcessKind::rough ? ProcessSpec{BrownianMotion{}} : ProcessSpec{SmoothSine{}};
    const PathGenerator gen(spec, grid.axis(0));
    const MeanFunction zero = zero_mean();

    std::vector<RateRow> rows(n_list.size());
    for (std::size_t cell = 0; cell < n_list.size(); ++cell) {
        const int n = n_list[cell];
        const double h = h_list[cell];
        const EstimatorPlan plan =
            make_plan(grid, zero, options.s, options.m, h, options.eval_trim, kernel);

        std::vector<double> sups(static_cast<std::size_t>(replicates), 0.0);
        parallel_for(sups.size(), options.workers, [&](std::size_t rep) {
            GaussianStream gs(mix_seed(options.seed, kRateStream + cell, rep));
            const std::size_t p1 = grid.total_size();
            std::vector<double> path(p1);
            Eigen::VectorXd zbar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p1));
            for (int i = 0; i < n; ++i) {
                gen.sample_values(gs, path);
                for (std::size_t j = 0; j < p1; ++j) zbar[static_cast<Eigen::Index>(j)] += path[j];
            }
            zbar /= static_cast<double>(n);
            double sup = 0.0;
            for (const WeightSet& w : plan.weights) sup = std::max(sup, std::abs(w.apply(zbar)));
            sups[rep] = sup;
        });

        rows[cell].n = n;
        rows[cell].h = h;
        rows[cell].mean_sup = pairwise_mean(sups);
        const double factor =
            kind == ProcessKind::rough ? std::sqrt(static_cast<double>(n) * h)
                                       : std::sqrt(static_cast<double>(n));
        rows[cell].scaled = factor * rows[cell].mean_sup;
    }
    return rows;
}

void write_rate_csv(ProcessKind kind, std::span<const RateRow> rows, std::ostream& out) {
    out << "kind,n,h,mean_sup_error,scaled_statistic\n";
    for (const RateRow& row : rows) {
        out << (kind == ProcessKind::rough ? "rough" : "smooth") << "," << row.n << ","
            << format_double(row.h) << "," << format_double(row.mean_sup) << ","
            << format_double(row.scaled) << "\n";
    }
}

std::string rate_summary_json(ProcessKind kind, std::span<const RateRow> rows) {
    nlohmann::json j;
    j["kind"] = kind == ProcessKind::rough ? "rough" : "smooth";
    j["scaling"] = kind == ProcessKind::rough ? "sqrt(n h)" : "sqrt(n)";
    j["rows"] = nlohmann::json::array();
    for (const RateRow& row : rows) {
        j["rows"].push_back({{"n", row.n},
                             {"h", row.h},
                             {"mean_sup_error", row.mean_sup},
                             {"scaled_statistic", row.scaled}});
    }
    return j.dump(2);
}

RatePreset table1_preset() {
    RatePreset preset;
    preset.n_list = {10, 20, 40, 80, 160, 240, 480, 800, 1600};
    preset.h_list = {0.34, 0.31, 0.28, 0.25, 0.22, 0.19, 0.16, 0.13, 0.1};
    preset.p = 800;
    preset.replicates = 1000;
    return preset;
}

double normal_cdf(double x, double variance) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

CltResult clt_experiment(int n, std::size_t p, int replicates, double h, double x0,
                         const CltOptions& options) {
    if (n < 2) throw ConfigError("CLT experiment needs n >= 2");
    if (!(x0 > 0.0 && x0 < 1.0)) throw ConfigError("x0 must be interior");

    SimConfig cfg;
    cfg.mean = options.mean;
    cfg.process = options.process;
    cfg.noise = NoiseSpec{options.sigma, options.dist};
    cfg.n = n;
    cfg.p = p;
    cfg.h_grid = {h};
    cfg.s = options.s;
    cfg.m = options.m;
    cfg.replicates = replicates;
    cfg.seed = options.seed;
    cfg.validate();

    const DesignGrid grid = cfg.make_grid();
    const Kernel kernel = epanechnikov_product_kernel(1);
    const MultiIndex si = MultiIndex::scalar(options.s);
    const double pt[1] = {x0};
    const WeightSet ws =
        local_poly_weights(grid, std::span<const double>(pt, 1), h, si, options.m, kernel);

    const std::size_t p1 = grid.total_size();
    Eigen::VectorXd mu(static_cast<Eigen::Index>(p1));
    for (std::size_t j = 0; j < p1; ++j) mu[static_cast<Eigen::Index>(j)] = cfg.mean.value(grid.axis(0)[j]);
    const double bias = ws.apply(mu) - cfg.mean.deriv(x0, options.s);

    std::vector<double> stats(static_cast<std::size_t>(replicates), 0.0);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    parallel_for(stats.size(), options.workers, [&](std::size_t rep) {
        const ComponentMeans cm = simulate_component_means(cfg, static_cast<int>(rep));
        stats[rep] = sqrt_n * (bias + ws.apply(cm.noise) + ws.apply(cm.process));
    });

    CltResult result;
    result.mean = pairwise_mean(stats);
    std::vector<double> centered_sq(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) {
        centered_sq[i] = (stats[i] - result.mean) * (stats[i] - result.mean);
    }
    result.variance = replicates > 1
                          ? pairwise_sum(centered_sq) / static_cast<double>(replicates - 1)
                          : 0.0;
    if (options.process && std::holds_alternative<SmoothSine>(*options.process)) {
        result.target_variance = options.s == 1 ? smooth_sine_derivative_covariance(x0, x0)
                                                : smooth_sine_covariance(x0, x0);
    } else if (options.process) {
        throw ConfigError("the limit comparison is implemented for the smooth sine process");
    }

    std::sort(stats.begin(), stats.end());
    double ks = 0.0;
    if (result.target_variance > 0.0) {
        for (std::size_t i = 0; i < stats.size(); ++i) {
            const double cdf = normal_cdf(stats[i], result.target_variance);
            const double lo = static_cast<double>(i) / static_cast<double>(stats.size());
            const double hi = static_cast<double>(i + 1) / static_cast<double>(stats.size());
            ks = std::max({ks, cdf - lo, hi - cdf});
        }
    }
    result.ks_statistic = ks;

    // Window-shape check: [c1 log(p)^{delta/(d+2s)} max((log p / p)^{1/(2s+d)}, 1/p),
    //                      c2 log(p)^{-delta} n^{-1/(2(alpha-s))}] with alpha = m + 1.
    const double logp = std::log(static_cast<double>(p1));
    const int d = 1;
    const double alpha = options.m + 1;
    result.window_lo =
        options.window_c1 * std::pow(logp, options.window_delta / (d + 2.0 * options.s)) *
        std::max(std::pow(logp / static_cast<double>(p1), 1.0 / (2.0 * options.s + d)),
                 1.0 / static_cast<double>(p1));
    result.window_hi = options.window_c2 * std::pow(logp, -options.window_delta) *
                       std::pow(static_cast<double>(n), -1.0 / (2.0 * (alpha - options.s)));
    result.window_ok = h >= result.window_lo && h <= result.window_hi;
    return result;
}

} // namespace fdaderiv
