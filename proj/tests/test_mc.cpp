#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "amrisk/calibrate.hpp"
#include "amrisk/mc.hpp"
#include "amrisk/stats.hpp"

using namespace amrisk;

TEST_CASE("discounted spot is a martingale and variance tracks the CIR mean") {
    const HestonParams p = base_case_params();
    const std::size_t n = 200000;
    const PathSet paths = simulate_heston(p, 1.0, n, 300, 31415);

    double sum_s = 0.0, sum_s2 = 0.0, sum_v = 0.0, sum_v2 = 0.0;
    const double disc = std::exp(-p.r);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = disc * paths.s(i, 300);
        sum_s += x;
        sum_s2 += x * x;
        const double v = paths.v(i, 300);
        sum_v += v;
        sum_v2 += v * v;
    }
    const double nn = static_cast<double>(n);
    const double mean_s = sum_s / nn;
    const double se_s = std::sqrt((sum_s2 / nn - mean_s * mean_s) / (nn - 1.0));
    CHECK(std::fabs(mean_s - p.s0) < 3.0 * se_s);

    const double mean_v = sum_v / nn;
    const double se_v = std::sqrt((sum_v2 / nn - mean_v * mean_v) / (nn - 1.0));
    const double cir_mean = p.theta + (p.v0 - p.theta) * std::exp(-p.kappa);
    CHECK(cir_mean == doctest::Approx(0.159343).epsilon(1e-5));
    CHECK(std::fabs(mean_v - cir_mean) < 3.0 * se_v);
}

TEST_CASE("increment correlation recovers rho") {
    const HestonParams p = base_case_params();
    const std::size_t n = 30000;
    const PathSet paths = simulate_heston(p, 1.0, n, 300, 2718);
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 300; ++j) {
            const double dls = std::log(paths.s(i, j + 1)) - std::log(paths.s(i, j));
            const double dv = paths.v(i, j + 1) - paths.v(i, j);
            sx += dls;
            sy += dv;
            sxx += dls * dls;
            syy += dv * dv;
            sxy += dls * dv;
            ++cnt;
        }
    }
    const double c = static_cast<double>(cnt);
    const double cov = sxy / c - (sx / c) * (sy / c);
    const double vx = sxx / c - (sx / c) * (sx / c);
    const double vy = syy / c - (sy / c) * (sy / c);
    const double corr = cov / std::sqrt(vx * vy);
    CHECK(std::fabs(corr - p.rho) < 0.01);
}

TEST_CASE("paths are positive, variance nonnegative, reproducible across thread counts") {
    const HestonParams p = base_case_params();
    const PathSet a = simulate_heston(p, 1.0, 5000, 300, 99, 0, 1);
    const PathSet b = simulate_heston(p, 1.0, 5000, 300, 99, 0, 3);
    CHECK(a.spot == b.spot);
    CHECK(a.var == b.var);
    for (double s : a.spot) CHECK(s > 0.0);
    for (double v : a.var) CHECK(v >= 0.0);

    // block decomposition is invisible: path k of a later block equals
    // path (first_path + k) of the full run
    const PathSet tail = simulate_heston(p, 1.0, 1000, 300, 99, 4000);
    for (std::size_t j = 0; j <= 300; ++j) {
        CHECK(tail.s(0, j) == a.s(4000, j));
        CHECK(tail.v(17, j) == a.v(4017, j));
    }
}

TEST_CASE("zero boundary defers exercise to maturity") {
    const HestonParams p = base_case_params();
    const PathSet paths = simulate_heston(p, 1.0, 2000, 300, 5);
    ExerciseBoundary1D zero;
    zero.times.resize(301);
    zero.values.assign(301, 0.0);
    for (std::size_t j = 0; j <= 300; ++j) zero.times[j] = static_cast<double>(j) / 300.0;

    const PayoffSampleSet res = apply_rule_1d(paths, zero, 10.0, p.r);
    const double disc = std::exp(-p.r);
    for (std::size_t i = 0; i < paths.n_paths; ++i) {
        CHECK(res.samples[i].payoff ==
              doctest::Approx(disc * std::max(10.0 - paths.s(i, 300), 0.0)));
        CHECK(res.samples[i].stop_step == -1);
    }
}

TEST_CASE("boundary at the strike exercises immediately with zero payoff") {
    const HestonParams p = base_case_params();
    const PathSet paths = simulate_heston(p, 1.0, 100, 300, 6);
    ExerciseBoundary1D at_strike;
    at_strike.times.resize(301);
    at_strike.values.assign(301, 10.0);
    for (std::size_t j = 0; j <= 300; ++j) at_strike.times[j] = static_cast<double>(j) / 300.0;

    const PayoffSampleSet res = apply_rule_1d(paths, at_strike, 10.0, p.r);
    for (const PayoffSample& s : res.samples) {
        CHECK(s.stop_step == 0);  // S(0) = K triggers at once
        CHECK(s.tau == 0.0);
        CHECK(s.payoff == 0.0);
    }
}

TEST_CASE("payoff bounds and ITM-at-stop invariants") {
    const HestonParams p = base_case_params();
    const PathSet paths = simulate_heston(p, 1.0, 20000, 300, 7);
    const LocalVolFn vol = LocalVolFn::constant(0.3708353);
    Solver1DConfig cfg;
    const ExerciseBoundary1D b = price_american_put_1d(vol, cfg, 10.0, 1.0, p.r).boundary;
    const PayoffSampleSet res = apply_rule_1d(paths, b, 10.0, p.r);
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        const PayoffSample& s = res.samples[i];
        CHECK(s.payoff <= 10.0);
        CHECK(s.tau >= 0.0);
        CHECK(s.tau <= 1.0);
        if (s.payoff > 0.0 && s.stop_step >= 0) {
            CHECK(paths.s(i, static_cast<std::size_t>(s.stop_step)) < 10.0);
        }
    }
}

TEST_CASE("degenerate 2d boundary reproduces the 1d rule") {
    const HestonParams p = base_case_params();
    const PathSet paths = simulate_heston(p, 1.0, 3000, 300, 8);

    std::vector<double> times(301);
    for (std::size_t j = 0; j <= 300; ++j) times[j] = static_cast<double>(j) / 300.0;
    const std::vector<double> knots{0.0, 0.5, 1.0, 2.0};
    ExerciseBoundary2D flat(times, knots, std::vector<double>(301 * 4, 7.5), 10.0);
    ExerciseBoundary1D flat1;
    flat1.times = times;
    flat1.values.assign(301, 7.5);

    const PayoffSampleSet r2 = apply_rule_2d(paths, flat, 10.0, p.r);
    const PayoffSampleSet r1 = apply_rule_1d(paths, flat1, 10.0, p.r);
    for (std::size_t i = 0; i < paths.n_paths; ++i) {
        CHECK(r1.samples[i].stop_step == r2.samples[i].stop_step);
        CHECK(r1.samples[i].payoff == doctest::Approx(r2.samples[i].payoff));
    }
}

TEST_CASE("recalibration dates: 52 weekly dates snapped onto the study grid") {
    const std::vector<std::size_t> steps = recalibration_steps(7.0 / 365.0, 1.0, 300);
    CHECK(steps.size() == 52);
    CHECK(steps.front() == 0);
    CHECK(steps[1] == 6);  // 7/365 * 300 = 5.75 -> step 6 (t = 0.02)
    CHECK(steps.back() < 300);
}

TEST_CASE("boundary cache quantizes and memoizes") {
    Solver1DConfig cfg;
    cfg.n1 = 50;
    cfg.n2 = 201;
    BoundaryCache cache(cfg, 10.0, 1.0, 0.1, 1e-3);
    const std::vector<double>& a = cache.boundary_for(0.37001);
    const std::vector<double>& b = cache.boundary_for(0.36999);
    CHECK(&a == &b);  // same quantized key
    CHECK(cache.size() == 1);
    cache.boundary_for(0.375);
    CHECK(cache.size() == 2);
    CHECK(cache.quantize(9.0) == kSigmaMax);
    CHECK(cache.quantize(1e-9) == kSigmaMin);
}

TEST_CASE("degenerate recalibration reproduces the static rule") {
    // vol-of-vol ~ 0 and v0 = theta: every recalibration returns the
    // same sigma, so stopping matches the static boundary rule
    HestonParams p = base_case_params();
    p.sigma_v = 1e-10;
    p.v0 = p.theta;
    const std::size_t n_steps = 100;
    const PathSet paths = simulate_heston(p, 1.0, 500, n_steps, 9);

    Solver1DConfig cfg;
    cfg.n1 = n_steps;
    cfg.n2 = 401;
    BoundaryCache cache(cfg, 10.0, 1.0, p.r, 1e-3);
    RecalibratedRuleConfig rcfg;
    rcfg.recal_steps = recalibration_steps(7.0 / 365.0, 1.0, n_steps);
    const PayoffSampleSet recal = apply_rule_recalibrated(paths, p, 10.0, p.r, rcfg, cache);

    const double sigma0 = cache.quantize(recalibrate_bs_on_path(0.0, p.s0, p.v0, p, 10.0, 1.0));
    const ExerciseBoundary1D stat{
        [&] {
            std::vector<double> t(n_steps + 1);
            for (std::size_t j = 0; j <= n_steps; ++j) {
                t[j] = static_cast<double>(j) / static_cast<double>(n_steps);
            }
            return t;
        }(),
        cache.boundary_for(sigma0)};
    const PayoffSampleSet stat_res = apply_rule_1d(paths, stat, 10.0, p.r);
    CHECK(cache.size() == 1);  // only one distinct volatility ever solved
    for (std::size_t i = 0; i < paths.n_paths; ++i) {
        CHECK(recal.samples[i].stop_step == stat_res.samples[i].stop_step);
        CHECK(recal.samples[i].payoff == doctest::Approx(stat_res.samples[i].payoff));
    }
}

TEST_CASE("payoff csv and pathset round trips") {
    const HestonParams p = base_case_params();
    const PathSet paths = simulate_heston(p, 1.0, 50, 20, 11);
    write_pathset(paths, p, "paths_test.bin", "paths_test.json");
    HestonParams q;
    const PathSet back = read_pathset("paths_test.bin", "paths_test.json", &q);
    CHECK(back.spot == paths.spot);
    CHECK(back.var == paths.var);
    CHECK(q.kappa == p.kappa);
    CHECK(back.seed == paths.seed);
}
