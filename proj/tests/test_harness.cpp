#include "fdaderiv/errors.hpp"
#include "fdaderiv/harness.hpp"
#include "fdaderiv/parallel.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace fdaderiv;

TEST_CASE("damped sine mean and derivative at the center") {
    const MeanFunction mu = damped_sine_mean();
    CHECK(mu.value(0.5) == doctest::Approx(0.0));
    CHECK(mu.deriv(0.5, 1) == doctest::Approx(6.0 * M_PI));
    CHECK_THROWS_AS(mu.deriv(0.5, 2), ConfigError);
}

TEST_CASE("polynomial mean derivatives") {
    const MeanFunction mu = polynomial_mean({1.0, -2.0, 3.0}); // 1 - 2x + 3x^2
    CHECK(mu.value(2.0) == doctest::Approx(9.0));
    CHECK(mu.deriv(2.0, 1) == doctest::Approx(10.0));
    CHECK(mu.deriv(2.0, 2) == doctest::Approx(6.0));
    CHECK(mu.deriv(2.0, 3) == doctest::Approx(0.0));
}

TEST_CASE("noiseless processless datasets equal the mean") {
    SimConfig cfg;
    cfg.mean = damped_sine_mean();
    cfg.process = std::nullopt;
    cfg.noise = {0.0, NoiseDist::gaussian};
    cfg.n = 2;
    cfg.p = 5;
    cfg.h_grid = {0.5};
    cfg.s = 0;
    cfg.m = 1;
    const FunctionalDataset data = simulate_dataset(cfg, 0);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(data.values()(i, static_cast<Eigen::Index>(j)) ==
                  doctest::Approx(cfg.mean.value(data.grid().axis(0)[j])));
        }
    }
}

TEST_CASE("simulation is deterministic per (seed, replicate)") {
    SimConfig cfg;
    cfg.process = BrownianMotion{};
    cfg.noise = {0.5, NoiseDist::gaussian};
    cfg.n = 4;
    cfg.p = 20;
    cfg.h_grid = {0.3};
    cfg.seed = 404;
    const FunctionalDataset a = simulate_dataset(cfg, 3);
    const FunctionalDataset b = simulate_dataset(cfg, 3);
    CHECK(a.values() == b.values());
    const FunctionalDataset c = simulate_dataset(cfg, 4);
    CHECK(a.values() != c.values());
}

TEST_CASE("column variance at the center matches the process-plus-noise identity") {
    SimConfig cfg;
    cfg.mean = damped_sine_mean();
    cfg.process = SmoothSine{};
    cfg.noise = {0.3, NoiseDist::gaussian};
    cfg.n = 20000;
    cfg.p = 101; // midpoint grid contains x = 0.5 exactly
    cfg.h_grid = {0.3};
    cfg.seed = 606;
    const FunctionalDataset data = simulate_dataset(cfg, 0);
    const std::size_t col = 50;
    REQUIRE(data.grid().axis(0)[col] == doctest::Approx(0.5));
    const Eigen::VectorXd column = data.values().col(static_cast<Eigen::Index>(col));
    const double mean = column.mean();
    const double var = (column.array() - mean).square().sum() / (cfg.n - 1);
    const double target = 4.0 / 9.0 + 0.09; // Var(Z(0.5)) + sigma^2
    const double se = target * std::sqrt(2.0 / cfg.n);
    CHECK(std::abs(var - target) <= 4.0 * se);
}

TEST_CASE("component means follow the same stream as the dataset") {
    SimConfig cfg;
    cfg.mean = damped_sine_mean();
    cfg.process = BrownianMotion{};
    cfg.noise = {0.4, NoiseDist::gaussian};
    cfg.n = 6;
    cfg.p = 30;
    cfg.h_grid = {0.3};
    cfg.seed = 808;
    const FunctionalDataset data = simulate_dataset(cfg, 1);
    const ComponentMeans cm = simulate_component_means(cfg, 1);
    const Eigen::VectorXd ybar = data.values().colwise().mean();
    for (std::size_t j = 0; j < cfg.p; ++j) {
        const double mu = cfg.mean.value(data.grid().axis(0)[j]);
        CHECK(std::abs(ybar[static_cast<Eigen::Index>(j)] -
                       (mu + cm.process[static_cast<Eigen::Index>(j)] +
                        cm.noise[static_cast<Eigen::Index>(j)])) < 1e-12);
    }
}

TEST_CASE("error decomposition identity and degenerate cases") {
    SimConfig cfg;
    cfg.mean = damped_sine_mean();
    cfg.process = BrownianMotion{};
    cfg.noise = {0.5, NoiseDist::gaussian};
    cfg.n = 25;
    cfg.p = 120;
    cfg.h_grid = {0.15};
    cfg.s = 1;
    cfg.m = 3;
    cfg.seed = 11;

    SUBCASE("identity holds pointwise") {
        const ErrorDecomposition dec = error_decomposition(cfg, 0, 0.15);
        CHECK(dec.identity_gap <= 1e-10);
        CHECK(dec.sup_total <= dec.sup_bias + dec.sup_noise + dec.sup_process + 1e-10);
    }
    SUBCASE("zero noise kills the noise term") {
        cfg.noise.sigma = 0.0;
        const ErrorDecomposition dec = error_decomposition(cfg, 0, 0.15);
        CHECK(dec.sup_noise == 0.0);
    }
    SUBCASE("polynomial means have negligible bias") {
        cfg.mean = polynomial_mean({0.5, 1.0, -1.0, 0.25});
        const ErrorDecomposition dec = error_decomposition(cfg, 0, 0.15);
        CHECK(dec.sup_bias <= 1e-8);
    }
    SUBCASE("bandwidth outside the guard range is rejected by name") {
        try {
            error_decomposition(cfg, 0, 0.6);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("(c/p, h0]") != std::string::npos);
        }
    }
}

TEST_CASE("bandwidth sweep on reproducible data finds near-zero error") {
    SimConfig cfg;
    cfg.mean = polynomial_mean({0.0, 2.0, 1.0});
    cfg.process = std::nullopt;
    cfg.noise = {0.0, NoiseDist::gaussian};
    cfg.n = 3;
    cfg.p = 80;
    cfg.h_grid = {0.1, 0.2, 0.3};
    cfg.s = 1;
    cfg.m = 2;
    cfg.replicates = 2;
    const SweepResult sweep = bandwidth_sweep(cfg);
    for (const SweepRow& row : sweep.rows) {
        REQUIRE_FALSE(row.degenerate);
        CHECK(row.mean_sup_total < 1e-8);
    }

    // Exact ties (zero mean, no randomness: every score is exactly 0)
    // break toward the smaller bandwidth.
    cfg.mean = zero_mean();
    const SweepResult tied = bandwidth_sweep(cfg);
    for (const SweepRow& row : tied.rows) CHECK(row.mean_sup_total == 0.0);
    CHECK(tied.best_h == 0.1);
}

TEST_CASE("sup-norm error is U-shaped in the bandwidth") {
    SimConfig cfg;
    cfg.mean = damped_sine_mean();
    cfg.process = BrownianMotion{};
    cfg.noise = {0.5, NoiseDist::gaussian};
    cfg.n = 600;
    cfg.p = 400;
    cfg.h_grid = {0.02, 0.05, 0.1, 0.16, 0.24, 0.38};
    cfg.s = 1;
    cfg.m = 3;
    cfg.replicates = 30;
    cfg.seed = 2024;
    const SweepResult sweep = bandwidth_sweep(cfg, 2);
    double min_err = 1e300;
    for (const SweepRow& row : sweep.rows) {
        REQUIRE_FALSE(row.degenerate);
        min_err = std::min(min_err, row.mean_sup_total);
    }
    CHECK(sweep.rows.front().mean_sup_total >= 1.2 * min_err);
    CHECK(sweep.rows.back().mean_sup_total >= 1.2 * min_err);
}

TEST_CASE("single-replicate rate cell equals a direct computation") {
    const int n = 5;
    const double h = 0.25;
    const std::size_t p = 60;
    RateOptions opts;
    opts.seed = 99;
    const auto rows = rate_table(ProcessKind::rough, std::vector<int>{n}, p, 1,
                                 std::vector<double>{h}, opts);
    REQUIRE(rows.size() == 1);

    // Direct recomputation from the same stream layout.
    const DesignGrid grid = uniform_midpoint_grid(p);
    const PathGenerator gen(BrownianMotion{}, grid.axis(0));
    GaussianStream gs(mix_seed(opts.seed, 0x52415445ULL + 0, 0));
    Eigen::VectorXd zbar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    std::vector<double> path(p);
    for (int i = 0; i < n; ++i) {
        gen.sample_values(gs, path);
        for (std::size_t j = 0; j < p; ++j) zbar[static_cast<Eigen::Index>(j)] += path[j];
    }
    zbar /= static_cast<double>(n);
    const Kernel kernel = epanechnikov_product_kernel(1);
    double sup = 0.0;
    for (double x : grid.axis(0)) {
        if (x < opts.eval_trim || x > 1.0 - opts.eval_trim) continue;
        const double pt[1] = {x};
        const WeightSet ws = local_poly_weights(grid, pt, h, MultiIndex::scalar(1), 3, kernel);
        sup = std::max(sup, std::abs(ws.apply(zbar)));
    }
    CHECK(rows[0].mean_sup == doctest::Approx(sup).epsilon(1e-12));
    CHECK(rows[0].scaled == doctest::Approx(std::sqrt(n * h) * sup).epsilon(1e-12));
}

TEST_CASE("rate tables are identical across worker counts") {
    RateOptions opts1, opts4;
    opts1.seed = opts4.seed = 1234;
    opts1.workers = 1;
    opts4.workers = 4;
    const std::vector<int> ns{10, 20};
    const std::vector<double> hs{0.3, 0.25};
    const auto a = rate_table(ProcessKind::smooth, ns, 100, 16, hs, opts1);
    const auto b = rate_table(ProcessKind::smooth, ns, 100, 16, hs, opts4);
    std::ostringstream sa, sb;
    write_rate_csv(ProcessKind::smooth, a, sa);
    write_rate_csv(ProcessKind::smooth, b, sb);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("clt experiment wiring: target variance, centering, degenerate case") {
    SUBCASE("smooth sine target and centered mean") {
        CltOptions opts;
        opts.mean = polynomial_mean({0.0, 1.0}); // exact for the local fit
        opts.sigma = 0.1;
        opts.seed = 5;
        const int reps = 200;
        const CltResult r = clt_experiment(50, 100, reps, 0.2, 0.5, opts);
        CHECK(r.target_variance == doctest::Approx(8.0 / 9.0 * M_PI * M_PI));
        CHECK(r.variance > 0.0);
        CHECK(std::abs(r.mean) <= 4.0 * std::sqrt(r.variance / reps));
    }
    SUBCASE("no randomness collapses the statistic to zero") {
        CltOptions opts;
        opts.mean = polynomial_mean({0.0, 1.0});
        opts.process = std::nullopt;
        opts.sigma = 0.0;
        opts.seed = 5;
        const CltResult r = clt_experiment(50, 100, 40, 0.2, 0.5, opts);
        CHECK(std::abs(r.mean) < 1e-12);
        CHECK(std::abs(r.variance) < 1e-24);
        CHECK(r.ks_statistic == 0.0);
    }
}

TEST_CASE("config JSON round trip preserves the experiment") {
    SimConfig cfg;
    cfg.mean = damped_sine_mean();
    cfg.process = FractionalBm{0.3};
    cfg.noise = {0.2, NoiseDist::uniform};
    cfg.n = 7;
    cfg.p = 33;
    cfg.h_grid = {0.2, 0.3};
    cfg.s = 1;
    cfg.m = 2;
    cfg.replicates = 5;
    cfg.seed = 42;
    cfg.trim = false;
    const nlohmann::json j = config_to_json(cfg);
    const SimConfig back = config_from_json(j);
    CHECK(back.mean.id == "damped_sine");
    CHECK(std::get<FractionalBm>(*back.process).hurst == 0.3);
    CHECK(back.noise.sigma == 0.2);
    CHECK(back.noise.dist == NoiseDist::uniform);
    CHECK(back.n == 7);
    CHECK(back.p == 33);
    CHECK(back.h_grid == cfg.h_grid);
    CHECK(back.trim == false);
    const FunctionalDataset a = simulate_dataset(cfg, 0);
    const FunctionalDataset b = simulate_dataset(back, 0);
    CHECK(a.values() == b.values());
}

TEST_CASE("config validation names the violated bound") {
    SimConfig cfg;
    cfg.p = 100;
    cfg.h_grid = {0.001}; // below c/p = 0.02
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0.02") != std::string::npos);
        CHECK(msg.find("(c/p, h0]") != std::string::npos);
    }
}

TEST_CASE("pairwise mean is order-stable") {
    std::vector<double> values(1000);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = std::sin(static_cast<double>(i)) * 1e-8 + 1.0;
    }
    const double a = pairwise_mean(values);
    double naive = 0.0;
    for (double v : values) naive += v;
    naive /= static_cast<double>(values.size());
    CHECK(a == doctest::Approx(naive).epsilon(1e-12));
}
