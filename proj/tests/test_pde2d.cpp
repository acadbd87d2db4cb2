#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "amrisk/heston.hpp"
#include "amrisk/pde2d.hpp"
#include "oracles/craig_sneyd.hpp"

using namespace amrisk;

namespace {

struct SmallGrids {
    Grid1D gs = build_sinh_stock_grid(10.0, 80.0, 2.0, 24);
    Grid1D gv = build_sinh_variance_grid(4.5, 4.5 / 80.0, 12);
};

}  // namespace

TEST_CASE("A0 row sums vanish away from the boundary") {
    SmallGrids g;
    const HestonParams p = base_case_params();
    const SplitOperator op(g.gs, g.gv, p);

    std::vector<double> ones(op.size(), 1.0), y(op.size());
    op.apply_a0(ones.data(), y.data());
    // rows whose mixed stencil stays interior: 2 <= i <= m1-2, 1 <= j <= m2-2
    for (std::size_t j = 1; j + 1 < op.levels_v(); ++j) {
        for (std::size_t i = 2; i + 1 <= op.interior_s(); ++i) {
            const double scale = std::fabs(p.rho * p.sigma_v * g.gv[j] * g.gs[i]) + 1.0;
            CHECK(std::fabs(y[op.index(i, j)]) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("degenerate coefficients empty the mixed and diffusion parts") {
    SmallGrids g;
    HestonParams p = base_case_params();
    p.sigma_v = 0.0;
    p.rho = 0.0;
    const SplitOperator op(g.gs, g.gv, p);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(op.size()), y(op.size());
    for (double& v : x) v = u(rng);
    op.apply_a0(x.data(), y.data());
    for (double v : y) CHECK(v == 0.0);

    // A2 carries only convection and reaction: applying it to the
    // v-coordinate function returns kappa(theta - v) - (r/2) v exactly
    // wherever the stencil stays off the v_max boundary
    std::vector<double> vcoord(op.size());
    for (std::size_t j = 0; j < op.levels_v(); ++j) {
        for (std::size_t i = 1; i <= op.interior_s(); ++i) vcoord[op.index(i, j)] = g.gv[j];
    }
    op.apply_a2(vcoord.data(), y.data());
    for (std::size_t j = 0; j + 3 < op.levels_v(); ++j) {
        for (std::size_t i = 1; i <= op.interior_s(); ++i) {
            const double expect = p.kappa * (p.theta - g.gv[j]) - 0.5 * p.r * g.gv[j];
            CHECK(y[op.index(i, j)] == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("discrete generator annihilates the stock coordinate") {
    // L S = r S and the reaction removes it; exact for linear payoffs
    SmallGrids g;
    const HestonParams p = base_case_params();
    const SplitOperator op(g.gs, g.gv, p);

    std::vector<double> scoord(op.size()), y(op.size());
    for (std::size_t j = 0; j < op.levels_v(); ++j) {
        for (std::size_t i = 1; i <= op.interior_s(); ++i) scoord[op.index(i, j)] = g.gs[i];
    }
    op.apply_full(scoord.data(), y.data());
    for (std::size_t j = 1; j + 3 < op.levels_v(); ++j) {
        for (std::size_t i = 2; i + 1 < op.interior_s(); ++i) {
            CHECK(std::fabs(y[op.index(i, j)]) <= 1e-8 * (1.0 + p.r * g.gs[i]));
        }
    }
}

TEST_CASE("boundary vectors respect the s_max-wins corner rule") {
    SmallGrids g;
    const HestonParams p = base_case_params();
    const SplitOperator op(g.gs, g.gv, p);
    const std::size_t i = op.interior_s();      // node next to s_max
    const std::size_t j = op.levels_v() - 1;    // level next to v_max
    const std::size_t corner_row = op.index(i, j);
    const double mix_scale = std::fabs(p.rho * p.sigma_v * g.gv[j] * g.gs[i]);

    // With the corner node on the s_max face, its three mixed-stencil
    // references to that face sum against the zero-sum central weights:
    // unit s_max data leaves b0 empty at the corner row, unit v_max data
    // does not.
    const auto b_smax = op.boundary(0.0, 1.0, 0.0);
    const auto b_vmax = op.boundary(0.0, 0.0, 1.0);
    CHECK(std::fabs(b_smax.b0[corner_row]) <= 1e-10 * mix_scale);
    CHECK(std::fabs(b_vmax.b0[corner_row]) > 1e-6 * mix_scale);
    // the v_max Dirichlet data also feeds the A2 part on the last level
    CHECK(std::fabs(b_vmax.b2[corner_row]) > 0.0);
    CHECK(b_smax.b2[corner_row] == 0.0);
}

TEST_CASE("MCS at lambda2 = 1/2 equals the Craig-Sneyd step") {
    SmallGrids g;
    const HestonParams p = base_case_params();
    const SplitOperator op(g.gs, g.gv, p);
    MCSConfig cfg;
    cfg.lambda2 = 0.5;
    const double dt = 1.0 / 300.0;
    const MCSStepper stepper(op, cfg, dt);
    const auto b = op.boundary(10.0, 0.0, 10.0);

    std::vector<double> state(op.size());
    for (std::size_t j = 0; j < op.levels_v(); ++j) {
        for (std::size_t i = 1; i <= op.interior_s(); ++i) {
            state[op.index(i, j)] = std::max(10.0 - g.gs[i], 0.0);
        }
    }
    const std::vector<double> mcs = stepper.step(state, b, b);
    const std::vector<double> cs = oracles::craig_sneyd_step(op, dt, state, b);
    for (std::size_t k = 0; k < mcs.size(); ++k) {
        CHECK(mcs[k] == doctest::Approx(cs[k]).epsilon(1e-12).scale(10.0));
    }
}

TEST_CASE("MCS degenerates to the one-dimensional theta step") {
    SmallGrids g;
    HestonParams p = base_case_params();
    p.sigma_v = 0.0;
    p.rho = 0.0;
    p.kappa = 1e-30;
    p.r = 0.0;
    const SplitOperator op(g.gs, g.gv, p);
    MCSConfig cfg;
    cfg.lambda2 = 0.5;
    const double dt = 0.01;
    const MCSStepper stepper(op, cfg, dt);
    const auto b = op.boundary(0.0, 0.0, 0.0);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::vector<double> state(op.size());
    for (double& v : state) v = u(rng);

    const std::vector<double> got = stepper.step(state, b, b);

    // direct Crank-Nicolson in S per v-level
    const std::size_t ns = op.interior_s();
    for (std::size_t j = 0; j < op.levels_v(); ++j) {
        TridiagonalMatrix lhs{std::vector<double>(ns - 1), std::vector<double>(ns),
                              std::vector<double>(ns - 1)};
        std::vector<double> rhs(ns);
        for (std::size_t k = 0; k < ns; ++k) {
            lhs.diag[k] = 1.0 - 0.5 * dt * op.a1_band(j, k, 0);
            if (k > 0) lhs.lower[k - 1] = -0.5 * dt * op.a1_band(j, k, -1);
            if (k + 1 < ns) lhs.upper[k] = -0.5 * dt * op.a1_band(j, k, 1);
            double a1x = op.a1_band(j, k, 0) * state[j * ns + k];
            if (k > 0) a1x += op.a1_band(j, k, -1) * state[j * ns + k - 1];
            if (k + 1 < ns) a1x += op.a1_band(j, k, 1) * state[j * ns + k + 1];
            rhs[k] = state[j * ns + k] + 0.5 * dt * a1x;
        }
        const std::vector<double> direct = solve_tridiagonal(lhs, rhs);
        for (std::size_t k = 0; k < ns; ++k) {
            CHECK(got[j * ns + k] == doctest::Approx(direct[k]).epsilon(1e-12).scale(5.0));
        }
    }
}

TEST_CASE("zero state and zero boundary stay zero") {
    SmallGrids g;
    const HestonParams p = base_case_params();
    const SplitOperator op(g.gs, g.gv, p);
    const MCSStepper stepper(op, MCSConfig{}, 0.01);
    const auto b = op.boundary(0.0, 0.0, 0.0);
    const std::vector<double> out = stepper.step(std::vector<double>(op.size(), 0.0), b, b);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("european put through the scheme matches the analytic price ATM") {
    const HestonParams p = base_case_params();
    const Grid1D gs = build_sinh_stock_grid(10.0, 80.0, 2.0, 500);
    const Grid1D gv = build_sinh_variance_grid(4.5, 4.5 / 80.0, 110);
    const HestonValueSurface sol = price_european_put_heston(p, gs, gv, MCSConfig{}, 10.0, 1.0);
    const OptionSpec spec{10.0, 1.0, OptionKind::Put, ExerciseStyle::European};
    const double analytic = heston_european_put(p, spec, 0.0, p.s0, p.v0);
    CHECK(std::fabs(sol.at(10.0, 0.0625) - analytic) <= 5e-3);
}

TEST_CASE("time-step halving shows second-order behavior on the smooth problem") {
    const HestonParams p = base_case_params();
    const Grid1D gs = build_sinh_stock_grid(10.0, 80.0, 2.0, 60);
    const Grid1D gv = build_sinh_variance_grid(4.5, 4.5 / 80.0, 24);

    const auto price_with_steps = [&](std::size_t m3) {
        MCSConfig cfg;
        cfg.m3 = m3;
        return price_european_put_heston(p, gs, gv, cfg, 10.0, 1.0).at(10.0, 0.0625);
    };
    const double reference = price_with_steps(640);
    const double e1 = std::fabs(price_with_steps(10) - reference);
    const double e2 = std::fabs(price_with_steps(20) - reference);
    const double e3 = std::fabs(price_with_steps(40) - reference);
    const double order12 = std::log2(e1 / e2);
    const double order23 = std::log2(e2 / e3);
    CHECK(order12 >= 1.7);
    CHECK(order23 >= 1.7);
}

TEST_CASE("lambda2 0.4 and 0.5 agree on the ATM american value") {
    const HestonParams p = base_case_params();
    const Grid1D gs = build_sinh_stock_grid(10.0, 80.0, 2.0, 500);
    const Grid1D gv = build_sinh_variance_grid(4.5, 4.5 / 80.0, 110);
    MCSConfig a;
    a.lambda2 = 0.4;
    MCSConfig b;
    b.lambda2 = 0.5;
    const double va =
        price_american_put_heston(p, gs, gv, a, 10.0, 1.0).value.at(10.0, 0.0625);
    const double vb =
        price_american_put_heston(p, gs, gv, b, 10.0, 1.0).value.at(10.0, 0.0625);
    CHECK(std::fabs(va - vb) <= 5e-3);
}

TEST_CASE("american solve: projection and boundary structure on a reduced grid") {
    const HestonParams p = base_case_params();
    const Grid1D gs = build_sinh_stock_grid(10.0, 80.0, 2.0, 100);
    const Grid1D gv = build_sinh_variance_grid(4.5, 4.5 / 80.0, 40);
    MCSConfig cfg;
    cfg.m3 = 100;
    const Heston2DResult res = price_american_put_heston(p, gs, gv, cfg, 10.0, 1.0);

    // value dominates intrinsic everywhere at t=0
    for (std::size_t j = 0; j < 40; ++j) {
        for (std::size_t i = 1; i < 100; ++i) {
            const double intrinsic = std::max(10.0 - gs[i], 0.0);
            CHECK(res.value.values[(i - 1) + 99 * j] >= intrinsic - 1e-12);
        }
    }
    // Convex in S at fixed v across the rule-relevant region. Near the
    // far (s_max, v_max) corner the clashing Dirichlet data (K on the
    // v_max face, 0 on the s_max face) kinks the profile, so the check
    // stays below v = 2.5 and S = 0.75 s_max.
    for (std::size_t j = 0; j < 40 && gv[j] <= 2.5; ++j) {
        for (std::size_t i = 2; i + 1 < 100 && gs[i + 1] <= 60.0; ++i) {
            const auto val = [&](std::size_t ii) { return res.value.values[(ii - 1) + 99 * j]; };
            const double sl = (val(i) - val(i - 1)) / (gs[i] - gs[i - 1]);
            const double sr = (val(i + 1) - val(i)) / (gs[i + 1] - gs[i]);
            CHECK(sr - sl >= -1e-6);
        }
    }

    const ExerciseBoundary2D& bd = res.boundary;
    // range, v-monotone (one cell slack), t-monotone (one cell slack)
    const auto cell = [&](double b) {
        const std::size_t i = std::min<std::size_t>(std::max<std::size_t>(gs.locate(b), 1),
                                                    gs.max_index() - 1);
        return std::max(gs.spacing(i), gs.spacing(i + 1));
    };
    for (std::size_t n = 0; n < bd.times().size(); ++n) {
        for (std::size_t j = 0; j < bd.v_knots().size(); ++j) {
            const double b = bd.raw_at(n, j);
            CHECK(b >= 0.0);
            CHECK(b <= 10.0);
            if (j > 0) CHECK(bd.raw_at(n, j) <= bd.raw_at(n, j - 1) + cell(bd.raw_at(n, j - 1)));
            if (n > 0) CHECK(bd.raw_at(n, j) + cell(bd.raw_at(n, j)) >= bd.raw_at(n - 1, j));
        }
    }

    // spline evaluation: reproduces knots, caps at v = 2
    const double t_probe = bd.times()[50];
    for (std::size_t j = 1; j + 1 < bd.v_knots().size(); ++j) {
        const double raw = bd.raw_at(50, j);
        if (bd.v_knots()[j] > 2.0) break;
        CHECK(bd.eval(t_probe, bd.v_knots()[j]) == doctest::Approx(raw).epsilon(1e-10).scale(1.0));
    }
    CHECK(bd.eval(t_probe, 2.5) == doctest::Approx(bd.eval(t_probe, 2.0)));
}
