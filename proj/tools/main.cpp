#include "fdaderiv/covdiag.hpp"
#include "fdaderiv/csv.hpp"
#include "fdaderiv/errors.hpp"
#include "fdaderiv/estimator.hpp"
#include "fdaderiv/harness.hpp"
#include "fdaderiv/parallel.hpp"
#include "fdaderiv/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct Manifest {
    std::string subcommand;
    json config;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    json inputs = json::object();
    std::vector<std::string> outputs;
    json extra = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& dir) const {
        json j;
        j["subcommand"] = subcommand;
        j["artifact_version"] = fdaderiv::kArtifactVersion;
        j["config"] = config;
        j["seed"] = seed;
        j["workers"] = workers;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
        j["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream out(dir / "manifest.json");
        if (!out) throw fdaderiv::IoError("cannot write manifest in " + dir.string());
        out << j.dump(2) << "\n";
    }
};

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw fdaderiv::IoError("cannot create output directory " + out + ": " + ec.message());
    return dir;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fdaderiv::IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw fdaderiv::IoError("JSON parse error in " + path + ": " + e.what());
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw fdaderiv::IoError("cannot write " + path.string());
    out << text;
}

int run_simulate(const std::string& config_path, const std::string& out,
                 std::optional<std::uint64_t> seed, unsigned workers) {
    json cfg_json = read_json_file(config_path);
    fdaderiv::SimConfig cfg = fdaderiv::config_from_json(cfg_json);
    if (seed) cfg.seed = *seed;

    const fs::path dir = prepare_out_dir(out);
    Manifest manifest;
    manifest.subcommand = "simulate";
    manifest.config = fdaderiv::config_to_json(cfg);
    manifest.seed = cfg.seed;
    manifest.workers = workers;
    manifest.inputs["config"] = config_path;

    const fdaderiv::FunctionalDataset data = fdaderiv::simulate_dataset(cfg, 0);
    std::ofstream csv(dir / "dataset.csv");
    if (!csv) throw fdaderiv::IoError("cannot write dataset.csv in " + out);
    fdaderiv::write_wide_csv(data, csv);
    manifest.outputs.push_back("dataset.csv");
    manifest.write(dir);
    std::cout << "wrote " << (dir / "dataset.csv").string() << " (" << data.n() << " x "
              << data.grid().total_size() << ")\n";
    return 0;
}

int run_estimate(const std::string& data_path, const std::string& grid_path, int s,
                 std::vector<int> s_index, int m, std::optional<double> h, bool use_cv,
                 std::vector<double> cv_grid, bool trim, std::size_t periodic_pad,
                 const std::string& out, unsigned workers) {
    (void)workers;
    std::optional<fdaderiv::DesignGrid> grid;
    if (!grid_path.empty()) {
        std::ifstream gin(grid_path);
        if (!gin) throw fdaderiv::IoError("cannot open " + grid_path);
        std::string text((std::istreambuf_iterator<char>(gin)), std::istreambuf_iterator<char>());
        grid = fdaderiv::grid_from_json(text);
    }
    fdaderiv::FunctionalDataset data = fdaderiv::read_wide_csv_file(data_path, std::move(grid));
    if (data.grid().dim() != 1 && periodic_pad > 0)
        throw fdaderiv::ConfigError("--periodic requires a 1-d design");

    const fs::path dir = prepare_out_dir(out);
    Manifest manifest;
    manifest.subcommand = "estimate";
    manifest.inputs["data"] = data_path;
    if (!grid_path.empty()) manifest.inputs["grid"] = grid_path;

    // Periodic wrap: estimate on the augmented design, report in original
    // coordinates and units (chain rule per derivative order).
    double coord_scale = 1.0, coord_offset = 0.0;
    std::vector<double> original_axis;
    if (periodic_pad > 0) {
        original_axis = data.grid().axis(0);
        auto aug = fdaderiv::periodic_augment(data, periodic_pad);
        coord_scale = aug.scale;
        coord_offset = aug.offset;
        data = std::move(aug.data);
    }

    const fdaderiv::Kernel kernel = fdaderiv::epanechnikov_product_kernel(data.grid().dim());
    double h_used = 0.0;
    json cv_json;
    if (use_cv) {
        if (cv_grid.empty()) {
            const double p = static_cast<double>(data.grid().total_size());
            const double lo = 2.5 / p;
            const double hi = 0.3;
            if (lo >= hi) throw fdaderiv::ConfigError("grid too small for the default CV grid");
            for (int i = 0; i < 10; ++i) {
                cv_grid.push_back(lo * std::pow(hi / lo, i / 9.0));
            }
        } else if (periodic_pad > 0) {
            for (double& hv : cv_grid) hv *= coord_scale;
        }
        const fdaderiv::CvResult cv = fdaderiv::cv_bandwidth(data, m, cv_grid, kernel);
        h_used = cv.selected_h;
        cv_json["selected_h"] = cv.selected_h;
        cv_json["bandwidths"] = cv.bandwidths;
        cv_json["scores"] = cv.scores;
        manifest.extra["cv"] = cv_json;
    } else {
        if (!h) throw fdaderiv::ConfigError("estimate needs --h <bandwidth> or --cv");
        h_used = periodic_pad > 0 ? *h * coord_scale : *h;
    }

    std::vector<std::vector<double>> eval_points;
    if (periodic_pad > 0) {
        for (double t : original_axis) eval_points.push_back({coord_scale * t + coord_offset});
    } else if (trim) {
        eval_points = fdaderiv::trimmed_eval_points(data.grid(), h_used);
        if (eval_points.empty())
            throw fdaderiv::ConfigError("no evaluation points inside [h, 1-h]");
    } else {
        eval_points = fdaderiv::all_eval_points(data.grid());
    }

    if (s_index.empty()) {
        if (data.grid().dim() != 1)
            throw fdaderiv::ConfigError("d > 1 data needs --s-index (one entry per axis)");
        s_index = {s};
    } else if (static_cast<int>(s_index.size()) != data.grid().dim()) {
        throw fdaderiv::ConfigError("--s-index length must equal the design dimension");
    }
    const fdaderiv::MultiIndex si(s_index);
    fdaderiv::DerivativeEstimate est =
        fdaderiv::estimate_derivative(data, si, m, h_used, eval_points, kernel);

    if (periodic_pad > 0) {
        // Map back to original coordinates and rescale derivative units.
        const double unit = std::pow(coord_scale, s);
        for (std::size_t i = 0; i < est.size(); ++i) {
            est.points[i][0] = original_axis[i];
            est.values[i] *= unit;
        }
        est.h = h_used / coord_scale;
    }

    std::ofstream csv(dir / "estimate.csv");
    if (!csv) throw fdaderiv::IoError("cannot write estimate.csv in " + out);
    fdaderiv::write_estimate_csv(est, csv);

    manifest.config = {{"s", si.entries()}, {"m", m},
                       {"h", est.h},        {"cv", use_cv},
                       {"trim", trim},      {"periodic_pad", periodic_pad},
                       {"kernel", kernel.id}};
    manifest.outputs.push_back("estimate.csv");
    manifest.write(dir);

    std::size_t flagged = 0;
    for (bool f : est.flagged) flagged += f ? 1 : 0;
    std::cout << "wrote " << (dir / "estimate.csv").string() << " (h = " << est.h << ", "
              << flagged << "/" << est.size() << " flagged)\n";
    if (est.all_flagged()) {
        std::cerr << "error: every evaluation point was degenerate\n";
        return kExitNumerical;
    }
    return 0;
}

int run_rates(const std::string& config_path, const std::string& preset, double scale,
              const std::string& out, std::optional<std::uint64_t> seed, unsigned workers) {
    fdaderiv::RatePreset rp;
    json cfg_json;
    std::uint64_t used_seed = seed.value_or(1);
    int s = 1, m = 3;
    if (!preset.empty()) {
        if (preset != "table1") throw fdaderiv::ConfigError("unknown preset: " + preset);
        rp = fdaderiv::table1_preset();
    } else {
        if (config_path.empty())
            throw fdaderiv::ConfigError("rates needs --preset or --config");
        cfg_json = read_json_file(config_path);
        try {
            rp.n_list = cfg_json.at("n_list").get<std::vector<int>>();
            rp.h_list = cfg_json.at("h_list").get<std::vector<double>>();
            rp.p = cfg_json.at("p").get<std::size_t>();
            rp.replicates = cfg_json.value("replicates", 1000);
            s = cfg_json.value("s", 1);
            m = cfg_json.value("m", 3);
            if (!seed && cfg_json.contains("seed")) used_seed = cfg_json["seed"].get<std::uint64_t>();
        } catch (const json::exception& e) {
            throw fdaderiv::ConfigError(std::string("rates config error: ") + e.what());
        }
    }
    if (scale != 1.0) {
        rp.replicates = std::max(1, static_cast<int>(std::lround(rp.replicates * scale)));
    }

    const fs::path dir = prepare_out_dir(out);
    Manifest manifest;
    manifest.subcommand = "rates";
    manifest.seed = used_seed;
    manifest.workers = workers;
    manifest.config = {{"n_list", rp.n_list}, {"h_list", rp.h_list},   {"p", rp.p},
                       {"replicates", rp.replicates}, {"s", s},        {"m", m},
                       {"preset", preset},    {"scale", scale}};
    if (!config_path.empty()) manifest.inputs["config"] = config_path;

    fdaderiv::RateOptions opts;
    opts.s = s;
    opts.m = m;
    opts.seed = used_seed;
    opts.workers = workers;

    json summary;
    for (auto kind : {fdaderiv::ProcessKind::rough, fdaderiv::ProcessKind::smooth}) {
        const auto rows =
            fdaderiv::rate_table(kind, rp.n_list, rp.p, rp.replicates, rp.h_list, opts);
        const std::string name =
            kind == fdaderiv::ProcessKind::rough ? "rates_rough.csv" : "rates_smooth.csv";
        std::ofstream csv(dir / name);
        if (!csv) throw fdaderiv::IoError("cannot write " + name + " in " + out);
        fdaderiv::write_rate_csv(kind, rows, csv);
        manifest.outputs.push_back(name);
        summary[kind == fdaderiv::ProcessKind::rough ? "rough" : "smooth"] =
            json::parse(fdaderiv::rate_summary_json(kind, rows));
    }
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    manifest.outputs.push_back("summary.json");
    manifest.write(dir);
    std::cout << "wrote rate tables to " << dir.string() << "\n";
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& out,
              std::optional<std::uint64_t> seed, unsigned workers) {
    json cfg_json = read_json_file(config_path);
    fdaderiv::SimConfig cfg = fdaderiv::config_from_json(cfg_json);
    if (seed) cfg.seed = *seed;

    const fs::path dir = prepare_out_dir(out);
    Manifest manifest;
    manifest.subcommand = "sweep";
    manifest.config = fdaderiv::config_to_json(cfg);
    manifest.seed = cfg.seed;
    manifest.workers = workers;
    manifest.inputs["config"] = config_path;

    const fdaderiv::SweepResult sweep = fdaderiv::bandwidth_sweep(cfg, workers);
    std::ofstream csv(dir / "sweep.csv");
    if (!csv) throw fdaderiv::IoError("cannot write sweep.csv in " + out);
    fdaderiv::write_sweep_csv(cfg, sweep, csv);
    manifest.extra["best_h"] = sweep.best_h;
    manifest.outputs.push_back("sweep.csv");
    manifest.write(dir);
    std::cout << "wrote " << (dir / "sweep.csv").string() << " (best h = " << sweep.best_h
              << ")\n";
    return 0;
}

int run_diagnose(const std::string& data_path, double h, int m, const std::string& out) {
    const fdaderiv::FunctionalDataset data = fdaderiv::read_wide_csv_file(data_path);
    if (data.n() < 2)
        throw fdaderiv::ConfigError("covariance diagnostic needs at least two curves");

    const fs::path dir = prepare_out_dir(out);
    Manifest manifest;
    manifest.subcommand = "diagnose";
    manifest.inputs["data"] = data_path;
    manifest.config = {{"h", h}, {"m", m}};

    fdaderiv::SmoothnessOptions opts;
    opts.order = m;
    opts.mean_order = m;
    const fdaderiv::DiagonalReport report = fdaderiv::smoothness_report(data, h, opts);

    std::ofstream csv(dir / "diagonal.csv");
    if (!csv) throw fdaderiv::IoError("cannot write diagonal.csv in " + out);
    fdaderiv::write_diagonal_csv(report, csv);
    write_text_file(dir / "summary.json", fdaderiv::diagonal_summary_json(report) + "\n");
    manifest.outputs.push_back("diagonal.csv");
    manifest.outputs.push_back("summary.json");
    manifest.write(dir);

    std::cout << "discrepancy D = " << report.max_discrepancy << ", scale S = " << report.scale
              << ", ratio = " << report.ratio
              << (report.indeterminate ? " (indeterminate: scale below noise floor)" : "")
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local polynomial mean-derivative estimation for functional data"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print help");

    std::string config_path, data_path, grid_path, out = "out", preset;
    std::optional<std::uint64_t> seed;
    unsigned workers = fdaderiv::default_worker_count();
    int s = 1, m = 3;
    std::vector<int> s_index;
    std::optional<double> h;
    bool use_cv = false;
    std::vector<double> cv_grid;
    bool trim = true;
    std::size_t periodic_pad = 0;
    double scale = 1.0;
    double diag_h = 0.2;
    int diag_m = 2;

    auto* sim = app.add_subcommand("simulate", "Simulate a synthetic dataset (wide CSV)");
    sim->add_option("--config", config_path, "Simulation config JSON")->required();
    sim->add_option("--out", out, "Output directory");
    sim->add_option("--seed", seed, "Override the config seed");
    sim->add_option("--workers", workers, "Worker threads");

    auto* est = app.add_subcommand("estimate", "Estimate a mean derivative from a wide CSV");
    est->set_help_flag("--help", "Print help");
    est->add_option("--data", data_path, "Input wide CSV")->required();
    est->add_option("--grid", grid_path, "Design grid JSON (for d > 1 data)");
    est->add_option("--s", s, "Derivative order (1-d data)");
    est->add_option("--s-index", s_index, "Derivative multi-index for d > 1")->delimiter(',');
    est->add_option("--m", m, "Local polynomial order");
    est->add_option("--h", h, "Bandwidth");
    est->add_flag("--cv", use_cv, "Select the bandwidth by leave-one-curve-out CV");
    est->add_option("--h-grid", cv_grid, "CV bandwidth grid")->delimiter(',');
    est->add_flag("--trim,!--no-trim", trim, "Evaluate on [h, 1-h] (default) or on [0,1]");
    est->add_option("--periodic", periodic_pad, "Wrap this many columns periodically");
    est->add_option("--out", out, "Output directory");
    est->add_option("--workers", workers, "Worker threads");

    auto* rates = app.add_subcommand("rates", "Rough/smooth process-error scaling tables");
    rates->add_option("--config", config_path, "Rates config JSON");
    rates->add_option("--preset", preset, "Named preset (table1)");
    rates->add_option("--scale", scale, "Replicate-count scale factor");
    rates->add_option("--out", out, "Output directory");
    rates->add_option("--seed", seed, "Master seed");
    rates->add_option("--workers", workers, "Worker threads");

    auto* sweep = app.add_subcommand("sweep", "Bandwidth sweep with error decomposition");
    sweep->add_option("--config", config_path, "Simulation config JSON")->required();
    sweep->add_option("--out", out, "Output directory");
    sweep->add_option("--seed", seed, "Override the config seed");
    sweep->add_option("--workers", workers, "Worker threads");

    auto* diag = app.add_subcommand("diagnose", "Covariance-derivative smoothness diagnostic");
    diag->set_help_flag("--help", "Print help");
    diag->add_option("--data", data_path, "Input wide CSV")->required();
    diag->add_option("--h", diag_h, "Bandwidth");
    diag->add_option("--m", diag_m, "Bivariate fit order");
    diag->add_option("--out", out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(config_path, out, seed, workers);
        if (est->parsed())
            return run_estimate(data_path, grid_path, s, s_index, m, h, use_cv, cv_grid, trim,
                                periodic_pad, out, workers);
        if (rates->parsed()) return run_rates(config_path, preset, scale, out, seed, workers);
        if (sweep->parsed()) return run_sweep(config_path, out, seed, workers);
        if (diag->parsed()) return run_diagnose(data_path, diag_h, diag_m, out);
    } catch (const fdaderiv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fdaderiv::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fdaderiv::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
