#include "amrisk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "amrisk/io.hpp"

namespace amrisk {

void ExperimentConfig::validate() const {
    params.validate();
    solver1d.validate();
    mcs.validate();
    if (!(strike > 0.0) || !(maturity > 0.0)) {
        throw std::invalid_argument("experiment config: bad strike or maturity");
    }
    if (n_paths == 0 || n_steps == 0 || block_paths == 0) {
        throw std::invalid_argument("experiment config: path counts must be positive");
    }
    if (n_steps != solver1d.n1 || n_steps != mcs.m3) {
        throw std::invalid_argument(
            "experiment config: simulation, 1d and 2d time grids must coincide");
    }
    if (rho_list.empty()) throw std::invalid_argument("experiment config: empty rho list");
    if (!(recal_frequency > 0.0 && recal_frequency < maturity)) {
        throw std::invalid_argument("experiment config: bad recalibration frequency");
    }
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["params"] = {{"kappa", params.kappa}, {"theta", params.theta},
                   {"sigma_v", params.sigma_v}, {"rho", params.rho},
                   {"r", params.r},         {"s0", params.s0},
                   {"v0", params.v0}};
    j["strike"] = strike;
    j["maturity"] = maturity;
    j["solver1d"] = {{"n1", solver1d.n1},
                     {"n2", solver1d.n2},
                     {"x0", solver1d.x0},
                     {"x_max", solver1d.x_max},
                     {"lambda1", solver1d.lambda1}};
    j["grids2d"] = {{"m1", grids2d.m1},
                    {"m2", grids2d.m2},
                    {"s_max_multiple", grids2d.s_max_multiple},
                    {"v_max", grids2d.v_max}};
    j["mcs"] = {{"lambda2", mcs.lambda2}, {"m3", mcs.m3}};
    j["dupire_tikhonov"] = dupire_tikhonov;
    j["n_paths"] = n_paths;
    j["n_steps"] = n_steps;
    j["seed"] = seed;
    j["n_threads"] = n_threads;
    j["block_paths"] = block_paths;
    j["rho_list"] = rho_list;
    j["recal_frequency"] = recal_frequency;
    j["out_dir"] = out_dir;
    j["quartile_convention"] = "type-7 linear interpolation of order statistics";
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    if (j.contains("params")) {
        const auto& q = j["params"];
        cfg.params = HestonParams{q.value("kappa", 5.0),  q.value("theta", 0.16),
                                  q.value("sigma_v", 0.9), q.value("rho", -0.5),
                                  q.value("r", 0.1),       q.value("s0", 10.0),
                                  q.value("v0", 0.0625)};
    }
    cfg.strike = j.value("strike", cfg.strike);
    cfg.maturity = j.value("maturity", cfg.maturity);
    if (j.contains("solver1d")) {
        const auto& s = j["solver1d"];
        cfg.solver1d.n1 = s.value("n1", cfg.solver1d.n1);
        cfg.solver1d.n2 = s.value("n2", cfg.solver1d.n2);
        cfg.solver1d.x0 = s.value("x0", cfg.solver1d.x0);
        cfg.solver1d.x_max = s.value("x_max", cfg.solver1d.x_max);
        cfg.solver1d.lambda1 = s.value("lambda1", cfg.solver1d.lambda1);
    }
    if (j.contains("grids2d")) {
        const auto& g = j["grids2d"];
        cfg.grids2d.m1 = g.value("m1", cfg.grids2d.m1);
        cfg.grids2d.m2 = g.value("m2", cfg.grids2d.m2);
        cfg.grids2d.s_max_multiple = g.value("s_max_multiple", cfg.grids2d.s_max_multiple);
        cfg.grids2d.v_max = g.value("v_max", cfg.grids2d.v_max);
    }
    if (j.contains("mcs")) {
        cfg.mcs.lambda2 = j["mcs"].value("lambda2", cfg.mcs.lambda2);
        cfg.mcs.m3 = j["mcs"].value("m3", cfg.mcs.m3);
    }
    cfg.dupire_tikhonov = j.value("dupire_tikhonov", cfg.dupire_tikhonov);
    cfg.n_paths = j.value("n_paths", cfg.n_paths);
    cfg.n_steps = j.value("n_steps", cfg.n_steps);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.n_threads = j.value("n_threads", cfg.n_threads);
    cfg.block_paths = j.value("block_paths", cfg.block_paths);
    if (j.contains("rho_list")) cfg.rho_list = j["rho_list"].get<std::vector<double>>();
    cfg.recal_frequency = j.value("recal_frequency", cfg.recal_frequency);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_json(text);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a_hash(cfg.to_json()); }

namespace {

nlohmann::json stats_json(const SummaryStats& s) {
    return {{"count", s.count}, {"median", s.median}, {"mean", s.mean},
            {"se_mean", s.se_mean}, {"q3", s.q3},     {"max", s.max}};
}

void write_summary(const nlohmann::json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << j.dump(2) << '\n';
}

void write_config(const ExperimentConfig& cfg, const std::string& dir) {
    std::ofstream f(dir + "/config.json");
    if (!f) throw std::runtime_error("cannot open config output");
    f << cfg.to_json() << '\n';
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg, double rho) {
    cfg.validate();
    HestonParams p = cfg.params;
    p.rho = rho;
    p.validate();

    PipelineResult res;
    res.rho = rho;
    res.quotes = make_heston_quote_surface(p);
    res.quotes.validate(p.s0, p.r);

    res.sigma_bs = calibrate_black_scholes(res.quotes, cfg.strike, cfg.maturity, p.r, p.s0);

    DupireCalibConfig dcfg;
    dcfg.solver = cfg.solver1d;
    dcfg.tikhonov = cfg.dupire_tikhonov;
    res.dupire = calibrate_dupire(res.quotes, dcfg, p.r, p.s0);

    res.bs_boundary = price_american_put_1d(LocalVolFn::constant(res.sigma_bs), cfg.solver1d,
                                            cfg.strike, cfg.maturity, p.r)
                          .boundary;
    res.dupire_boundary =
        price_american_put_1d(LocalVolFn::from_surface(res.dupire.surface), cfg.solver1d,
                              cfg.strike, cfg.maturity, p.r)
            .boundary;

    const Grid1D gs = cfg.grids2d.stock_grid(cfg.strike, p.s0);
    const Grid1D gv = cfg.grids2d.variance_grid();
    res.heston_boundary =
        price_american_put_heston(p, gs, gv, cfg.mcs, cfg.strike, cfg.maturity).boundary;

    res.heston_payoffs.rule = "heston";
    res.bs_payoffs.rule = "black_scholes";
    res.dupire_payoffs.rule = "dupire";
    for (std::size_t done = 0; done < cfg.n_paths;) {
        const std::size_t count = std::min(cfg.block_paths, cfg.n_paths - done);
        const PathSet block = simulate_heston(p, cfg.maturity, count, cfg.n_steps, cfg.seed,
                                              done, cfg.n_threads);
        res.heston_payoffs.append(apply_rule_2d(block, res.heston_boundary, cfg.strike, p.r));
        res.bs_payoffs.append(apply_rule_1d(block, res.bs_boundary, cfg.strike, p.r));
        res.dupire_payoffs.append(apply_rule_1d(block, res.dupire_boundary, cfg.strike, p.r));
        done += count;
    }
    res.heston_stats = summarize(res.heston_payoffs.payoffs());
    res.bs_stats = summarize(res.bs_payoffs.payoffs());
    res.dupire_stats = summarize(res.dupire_payoffs.payoffs());
    return res;
}

namespace {

void emit_pipeline_files(const ExperimentConfig& cfg, const PipelineResult& res,
                         const std::string& dir) {
    ensure_directory(dir);
    write_quotes_csv(res.quotes, dir + "/quotes.csv");
    write_report_json(res.dupire.report, dir + "/calibration_report.json");
    write_local_vol_csv(*res.dupire.surface, dir + "/local_vol.csv", 10, 10);
    write_boundary_csv(res.bs_boundary, dir + "/boundary_bs.csv");
    write_boundary_csv(res.dupire_boundary, dir + "/boundary_dupire.csv");
    write_boundary2d_csv(res.heston_boundary, dir + "/boundary_heston_raw.csv",
                         dir + "/boundary_heston_spline.csv");
    write_payoffs_csv(res.heston_payoffs, dir + "/payoffs_heston.csv");
    write_payoffs_csv(res.bs_payoffs, dir + "/payoffs_bs.csv");
    write_payoffs_csv(res.dupire_payoffs, dir + "/payoffs_dupire.csv");

    const std::size_t nq = 199;
    write_pairs_csv(qq_pairs(res.heston_payoffs.payoffs(), res.bs_payoffs.payoffs(), nq),
                    "q_heston,q_bs", dir + "/qq_payoffs_bs.csv");
    write_pairs_csv(qq_pairs(res.heston_payoffs.payoffs(), res.dupire_payoffs.payoffs(), nq),
                    "q_heston,q_dupire", dir + "/qq_payoffs_dupire.csv");
    // stopping-time QQ: exercised paths only, and the tau = T convention
    for (const bool exercised_only : {true, false}) {
        const std::string tag = exercised_only ? "" : "_tauT";
        write_pairs_csv(qq_pairs(res.heston_payoffs.stopping_times(exercised_only),
                                 res.bs_payoffs.stopping_times(exercised_only), nq),
                        "q_heston,q_bs", dir + "/qq_stopping_bs" + tag + ".csv");
        write_pairs_csv(qq_pairs(res.heston_payoffs.stopping_times(exercised_only),
                                 res.dupire_payoffs.stopping_times(exercised_only), nq),
                        "q_heston,q_dupire", dir + "/qq_stopping_dupire" + tag + ".csv");
    }

    const std::size_t n_scatter = std::min<std::size_t>(10000, res.heston_payoffs.samples.size());
    std::vector<double> ph(n_scatter), pb(n_scatter), pd(n_scatter);
    for (std::size_t i = 0; i < n_scatter; ++i) {
        ph[i] = res.heston_payoffs.samples[i].payoff;
        pb[i] = res.bs_payoffs.samples[i].payoff;
        pd[i] = res.dupire_payoffs.samples[i].payoff;
    }
    write_columns_csv({"heston", "black_scholes", "dupire"}, {&ph, &pb, &pd},
                      dir + "/scatter_first10k.csv");

    nlohmann::json j;
    j["config_hash"] = config_hash(cfg);
    j["rho"] = res.rho;
    j["sigma_bs"] = res.sigma_bs;
    j["dupire_mean_rel_abs_error"] = res.dupire.report.mean_rel_abs_error;
    j["payoff_stats"] = {{"heston", stats_json(res.heston_stats)},
                         {"black_scholes", stats_json(res.bs_stats)},
                         {"dupire", stats_json(res.dupire_stats)}};
    j["exercised_fraction"] = {{"heston", res.heston_payoffs.exercised_fraction()},
                               {"black_scholes", res.bs_payoffs.exercised_fraction()},
                               {"dupire", res.dupire_payoffs.exercised_fraction()}};
    write_summary(j, dir + "/summary.json");
}

}  // namespace

PipelineResult run_base_case(const ExperimentConfig& cfg) {
    PipelineResult res = run_pipeline(cfg, cfg.params.rho);
    ensure_directory(cfg.out_dir);
    write_config(cfg, cfg.out_dir);
    emit_pipeline_files(cfg, res, cfg.out_dir);
    return res;
}

CorrelationSweepResult run_correlation_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    CorrelationSweepResult out;
    for (double rho : cfg.rho_list) out.per_rho.push_back(run_pipeline(cfg, rho));

    ensure_directory(cfg.out_dir);
    write_config(cfg, cfg.out_dir);
    nlohmann::json matrix = nlohmann::json::array();
    for (std::size_t k = 0; k < out.per_rho.size(); ++k) {
        const PipelineResult& res = out.per_rho[k];
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g", res.rho);
        const std::string dir = cfg.out_dir + "/rho_" + buf;
        emit_pipeline_files(cfg, res, dir);
        matrix.push_back({{"rho", res.rho},
                          {"heston", stats_json(res.heston_stats)},
                          {"black_scholes", stats_json(res.bs_stats)},
                          {"dupire", stats_json(res.dupire_stats)},
                          {"sigma_bs", res.sigma_bs}});
    }

    // within-model stopping-time comparison between the extreme
    // correlations, matching the negative-vs-positive figure
    if (out.per_rho.size() >= 2) {
        const PipelineResult& lo = out.per_rho.front();
        const PipelineResult& hi = out.per_rho.back();
        const std::size_t nq = 199;
        write_pairs_csv(qq_pairs(lo.heston_payoffs.stopping_times(true),
                                 hi.heston_payoffs.stopping_times(true), nq),
                        "q_rho_low,q_rho_high", cfg.out_dir + "/qq_stopping_internal_heston.csv");
        write_pairs_csv(qq_pairs(lo.bs_payoffs.stopping_times(true),
                                 hi.bs_payoffs.stopping_times(true), nq),
                        "q_rho_low,q_rho_high", cfg.out_dir + "/qq_stopping_internal_bs.csv");
        write_pairs_csv(qq_pairs(lo.dupire_payoffs.stopping_times(true),
                                 hi.dupire_payoffs.stopping_times(true), nq),
                        "q_rho_low,q_rho_high", cfg.out_dir + "/qq_stopping_internal_dupire.csv");
    }

    nlohmann::json j;
    j["config_hash"] = config_hash(cfg);
    j["per_rho"] = matrix;
    write_summary(j, cfg.out_dir + "/summary.json");
    return out;
}

RecalibrationResult run_recalibration(const ExperimentConfig& cfg) {
    cfg.validate();
    const HestonParams& p = cfg.params;

    RecalibrationResult res;
    const QuoteSurface quotes = make_heston_quote_surface(p);
    res.sigma_initial = calibrate_black_scholes(quotes, cfg.strike, cfg.maturity, p.r, p.s0);

    const ExerciseBoundary1D static_boundary =
        price_american_put_1d(LocalVolFn::constant(res.sigma_initial), cfg.solver1d, cfg.strike,
                              cfg.maturity, p.r)
            .boundary;
    const Grid1D gs = cfg.grids2d.stock_grid(cfg.strike, p.s0);
    const Grid1D gv = cfg.grids2d.variance_grid();
    const ExerciseBoundary2D heston_boundary =
        price_american_put_heston(p, gs, gv, cfg.mcs, cfg.strike, cfg.maturity).boundary;

    RecalibratedRuleConfig rcfg;
    rcfg.recal_steps = recalibration_steps(cfg.recal_frequency, cfg.maturity, cfg.n_steps);
    BoundaryCache cache(cfg.solver1d, cfg.strike, cfg.maturity, p.r, rcfg.sigma_quantum);

    res.heston_payoffs.rule = "heston";
    res.static_payoffs.rule = "bs_static";
    res.recal_payoffs.rule = "bs_recalibrated";
    res.trace.steps = rcfg.recal_steps;
    res.trace.implied_vols.assign(rcfg.recal_steps.size(), {});
    res.trace.spot_vols.assign(rcfg.recal_steps.size(), {});

    for (std::size_t done = 0; done < cfg.n_paths;) {
        const std::size_t count = std::min(cfg.block_paths, cfg.n_paths - done);
        const PathSet block = simulate_heston(p, cfg.maturity, count, cfg.n_steps, cfg.seed,
                                              done, cfg.n_threads);
        res.heston_payoffs.append(apply_rule_2d(block, heston_boundary, cfg.strike, p.r));
        res.static_payoffs.append(apply_rule_1d(block, static_boundary, cfg.strike, p.r));
        RecalibrationTrace block_trace;
        res.recal_payoffs.append(
            apply_rule_recalibrated(block, p, cfg.strike, p.r, rcfg, cache, &block_trace));
        for (std::size_t k = 0; k < rcfg.recal_steps.size(); ++k) {
            auto& iv = res.trace.implied_vols[k];
            iv.insert(iv.end(), block_trace.implied_vols[k].begin(),
                      block_trace.implied_vols[k].end());
            auto& sv = res.trace.spot_vols[k];
            sv.insert(sv.end(), block_trace.spot_vols[k].begin(), block_trace.spot_vols[k].end());
        }
        done += count;
    }
    res.heston_stats = summarize(res.heston_payoffs.payoffs());
    res.static_stats = summarize(res.static_payoffs.payoffs());
    res.recal_stats = summarize(res.recal_payoffs.payoffs());
    res.boundary_cache_size = cache.size();

    ensure_directory(cfg.out_dir);
    write_config(cfg, cfg.out_dir);
    write_payoffs_csv(res.heston_payoffs, cfg.out_dir + "/payoffs_heston.csv");
    write_payoffs_csv(res.static_payoffs, cfg.out_dir + "/payoffs_bs_static.csv");
    write_payoffs_csv(res.recal_payoffs, cfg.out_dir + "/payoffs_bs_recalibrated.csv");

    // implied-vol and spot-vol samples at the dates of the density figure
    const double targets[] = {0.02, 0.347, 0.813};
    const double dt = cfg.maturity / static_cast<double>(cfg.n_steps);
    for (double tgt : targets) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < rcfg.recal_steps.size(); ++k) {
            const double tk = dt * static_cast<double>(rcfg.recal_steps[k]);
            const double tb = dt * static_cast<double>(rcfg.recal_steps[best]);
            if (std::fabs(tk - tgt) < std::fabs(tb - tgt)) best = k;
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", dt * static_cast<double>(rcfg.recal_steps[best]));
        write_columns_csv({"implied_vol", "spot_vol"},
                          {&res.trace.implied_vols[best], &res.trace.spot_vols[best]},
                          cfg.out_dir + "/vol_samples_t" + buf + ".csv");
    }

    const std::size_t n_scatter = std::min<std::size_t>(10000, res.recal_payoffs.samples.size());
    std::vector<double> ps(n_scatter), pr(n_scatter);
    for (std::size_t i = 0; i < n_scatter; ++i) {
        ps[i] = res.static_payoffs.samples[i].payoff;
        pr[i] = res.recal_payoffs.samples[i].payoff;
    }
    write_columns_csv({"bs_static", "bs_recalibrated"}, {&ps, &pr},
                      cfg.out_dir + "/scatter_static_vs_recal.csv");

    nlohmann::json j;
    j["config_hash"] = config_hash(cfg);
    j["sigma_initial"] = res.sigma_initial;
    j["recalibration_steps"] = rcfg.recal_steps;
    j["boundary_cache_size"] = res.boundary_cache_size;
    j["payoff_stats"] = {{"heston", stats_json(res.heston_stats)},
                         {"bs_recalibrated", stats_json(res.recal_stats)},
                         {"bs_static", stats_json(res.static_stats)}};
    write_summary(j, cfg.out_dir + "/summary.json");
    return res;
}

}  // namespace amrisk
