// Command line front end: calibration, boundary computation, simulation
// and the three studies, all driven by a JSON config.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "amrisk/experiments.hpp"
#include "amrisk/io.hpp"
#include "amrisk/linalg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t paths = 0;
    bool paths_set = false;
};

amrisk::ExperimentConfig load_config(const CommonOpts& opts) {
    amrisk::ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = amrisk::ExperimentConfig::load(opts.config_path);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (opts.paths_set) cfg.n_paths = opts.paths;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file (ExperimentConfig fields)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "RNG seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--paths", opts.paths, "number of Monte Carlo paths")
        ->each([&](const std::string&) { opts.paths_set = true; });
}

int cmd_calibrate(const CommonOpts& opts) {
    amrisk::ExperimentConfig cfg = load_config(opts);
    amrisk::ensure_directory(cfg.out_dir);
    const amrisk::QuoteSurface quotes = amrisk::make_heston_quote_surface(cfg.params);
    amrisk::write_quotes_csv(quotes, cfg.out_dir + "/quotes.csv");

    const double sigma = amrisk::calibrate_black_scholes(quotes, cfg.strike, cfg.maturity,
                                                         cfg.params.r, cfg.params.s0);
    amrisk::DupireCalibConfig dcfg;
    dcfg.solver = cfg.solver1d;
    dcfg.tikhonov = cfg.dupire_tikhonov;
    const amrisk::DupireCalibration dup =
        amrisk::calibrate_dupire(quotes, dcfg, cfg.params.r, cfg.params.s0);
    amrisk::write_report_json(dup.report, cfg.out_dir + "/calibration_report.json");
    amrisk::write_local_vol_csv(*dup.surface, cfg.out_dir + "/local_vol.csv", 10, 10);

    nlohmann::json j;
    j["sigma_bs"] = sigma;
    j["dupire_mean_rel_abs_error"] = dup.report.mean_rel_abs_error;
    std::ofstream f(cfg.out_dir + "/calibration.json");
    f << j.dump(2) << '\n';
    std::cout << "sigma_bs=" << sigma
              << " dupire_mean_rel_abs_error=" << dup.report.mean_rel_abs_error << '\n';
    return kExitOk;
}

int cmd_boundary(const CommonOpts& opts, const std::string& model) {
    amrisk::ExperimentConfig cfg = load_config(opts);
    amrisk::ensure_directory(cfg.out_dir);
    const amrisk::QuoteSurface quotes = amrisk::make_heston_quote_surface(cfg.params);

    if (model == "bs" || model == "all") {
        const double sigma = amrisk::calibrate_black_scholes(quotes, cfg.strike, cfg.maturity,
                                                             cfg.params.r, cfg.params.s0);
        const auto res = amrisk::price_american_put_1d(amrisk::LocalVolFn::constant(sigma),
                                                       cfg.solver1d, cfg.strike, cfg.maturity,
                                                       cfg.params.r);
        amrisk::write_boundary_csv(res.boundary, cfg.out_dir + "/boundary_bs.csv");
    }
    if (model == "dupire" || model == "all") {
        amrisk::DupireCalibConfig dcfg;
        dcfg.solver = cfg.solver1d;
        dcfg.tikhonov = cfg.dupire_tikhonov;
        const auto dup = amrisk::calibrate_dupire(quotes, dcfg, cfg.params.r, cfg.params.s0);
        const auto res = amrisk::price_american_put_1d(amrisk::LocalVolFn::from_surface(dup.surface),
                                                       cfg.solver1d, cfg.strike, cfg.maturity,
                                                       cfg.params.r);
        amrisk::write_boundary_csv(res.boundary, cfg.out_dir + "/boundary_dupire.csv");
    }
    if (model == "heston" || model == "all") {
        const amrisk::Grid1D gs = cfg.grids2d.stock_grid(cfg.strike, cfg.params.s0);
        const amrisk::Grid1D gv = cfg.grids2d.variance_grid();
        const auto res = amrisk::price_american_put_heston(cfg.params, gs, gv, cfg.mcs,
                                                           cfg.strike, cfg.maturity);
        amrisk::write_boundary2d_csv(res.boundary, cfg.out_dir + "/boundary_heston_raw.csv",
                                     cfg.out_dir + "/boundary_heston_spline.csv");
    }
    return kExitOk;
}

int cmd_simulate(const CommonOpts& opts) {
    amrisk::ExperimentConfig cfg = load_config(opts);
    amrisk::ensure_directory(cfg.out_dir);
    const amrisk::PathSet paths = amrisk::simulate_heston(
        cfg.params, cfg.maturity, cfg.n_paths, cfg.n_steps, cfg.seed, 0, cfg.n_threads);
    amrisk::write_pathset(paths, cfg.params, cfg.out_dir + "/paths.bin",
                          cfg.out_dir + "/paths.json");
    std::cout << "wrote " << paths.n_paths << " paths x " << paths.n_steps << " steps\n";
    return kExitOk;
}

int cmd_report(const std::string& payoffs_csv, const std::string& out_file) {
    std::ifstream f(payoffs_csv);
    if (!f) throw std::invalid_argument("cannot open " + payoffs_csv);
    std::string line;
    std::getline(f, line);
    std::vector<double> payoffs;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto pos = line.rfind(',');
        payoffs.push_back(std::stod(line.substr(pos + 1)));
    }
    const amrisk::SummaryStats s = amrisk::summarize(payoffs);
    nlohmann::json j = {{"count", s.count}, {"median", s.median}, {"mean", s.mean},
                        {"se_mean", s.se_mean}, {"q3", s.q3},     {"max", s.max}};
    if (out_file.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::ofstream out(out_file);
        out << j.dump(2) << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"American put exercise under misspecified models: calibration, boundaries, "
                 "simulation and studies"};
    app.require_subcommand(1);

    CommonOpts calibrate_opts, boundary_opts, simulate_opts, experiment_opts;
    std::string boundary_model = "all";
    std::string experiment_kind;
    std::string report_payoffs, report_out;

    CLI::App* c_cal = app.add_subcommand("calibrate", "calibrate both misspecified models");
    add_common(c_cal, calibrate_opts);

    CLI::App* c_bnd = app.add_subcommand("boundary", "compute exercise boundaries");
    add_common(c_bnd, boundary_opts);
    c_bnd->add_option("--model", boundary_model, "bs|dupire|heston|all");

    CLI::App* c_sim = app.add_subcommand("simulate", "simulate benchmark paths");
    add_common(c_sim, simulate_opts);

    CLI::App* c_exp = app.add_subcommand("experiment", "run a study");
    add_common(c_exp, experiment_opts);
    c_exp->add_option("kind", experiment_kind, "base|corr|recal")->required();

    CLI::App* c_rep = app.add_subcommand("report", "summarize a payoff sample CSV");
    c_rep->add_option("--payoffs", report_payoffs, "payoff CSV (path_id,stop_step,tau,payoff)")
        ->required();
    c_rep->add_option("--out", report_out, "output JSON file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (c_cal->parsed()) return cmd_calibrate(calibrate_opts);
        if (c_bnd->parsed()) return cmd_boundary(boundary_opts, boundary_model);
        if (c_sim->parsed()) return cmd_simulate(simulate_opts);
        if (c_exp->parsed()) {
            amrisk::ExperimentConfig cfg = load_config(experiment_opts);
            if (experiment_kind == "base") {
                amrisk::run_base_case(cfg);
            } else if (experiment_kind == "corr") {
                amrisk::run_correlation_sweep(cfg);
            } else if (experiment_kind == "recal") {
                amrisk::run_recalibration(cfg);
            } else {
                std::cerr << "unknown experiment kind: " << experiment_kind << '\n';
                return kExitConfig;
            }
            std::cout << "outputs in " << cfg.out_dir << '\n';
            return kExitOk;
        }
        if (c_rep->parsed()) return cmd_report(report_payoffs, report_out);
    } catch (const amrisk::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}
