#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "amrisk/calibrate.hpp"

using namespace amrisk;

TEST_CASE("black-scholes calibration round trip on its own surface") {
    const QuoteSurface qs = make_bs_quote_surface(0.25, 0.1, 10.0);
    const double sigma = calibrate_black_scholes(qs, 10.0, 1.0, 0.1, 10.0);
    CHECK(sigma == doctest::Approx(0.25).epsilon(1e-8));
    CHECK_THROWS_AS(calibrate_black_scholes(qs, 6.5, 1.0, 0.1, 10.0), std::invalid_argument);
}

TEST_CASE("black-scholes calibration on the base-case surface") {
    const HestonParams p = base_case_params();
    const QuoteSurface qs = make_heston_quote_surface(p);
    const double sigma = calibrate_black_scholes(qs, 10.0, 1.0, p.r, p.s0);
    // high-precision oracle value; the study text reports 0.3708353 from
    // a biased quote generator (see the heston pricer tests)
    CHECK(sigma == doctest::Approx(0.3699704).epsilon(2e-5));
    CHECK(std::fabs(sigma - 0.3708353) < 1e-3);
}

TEST_CASE("dupire calibration on flat black-scholes quotes recovers the flat surface") {
    const double true_sigma = 0.25;
    const QuoteSurface qs = make_bs_quote_surface(true_sigma, 0.1, 10.0);
    DupireCalibConfig cfg;
    const DupireCalibration cal = calibrate_dupire(qs, cfg, 0.1, 10.0);

    // repricing error small, surface near the generating vol across the
    // whole optimization region
    CHECK(cal.report.mean_rel_abs_error < 0.015);
    const LocalVolSurface& surf = *cal.surface;
    for (double t : {0.3, 0.5, 0.75, 0.9}) {
        for (double s : {2.2, 4.0, 7.0, 10.0, 13.0, 16.0, 19.5}) {
            const double sig = surf.sigma(t, s);
            CHECK(sig >= 0.24);
            CHECK(sig <= 0.26);
        }
    }
    for (const QuoteError& q : cal.report.per_quote) {
        CHECK(q.rel_abs_error >= 0.0);
    }
}

TEST_CASE("dupire calibration requires at least two maturities") {
    QuoteSurface qs = make_bs_quote_surface(0.25, 0.1, 10.0);
    QuoteSurface single;
    for (const Quote& q : qs.quotes) {
        if (std::fabs(q.maturity - 1.0) < 1e-12) single.quotes.push_back(q);
    }
    DupireCalibConfig cfg;
    CHECK_THROWS_AS(calibrate_dupire(single, cfg, 0.1, 10.0), std::invalid_argument);
}

TEST_CASE("dupire calibration reprices the base-case quotes") {
    const HestonParams p = base_case_params();
    const QuoteSurface qs = make_heston_quote_surface(p);
    DupireCalibConfig cfg;
    const DupireCalibration cal = calibrate_dupire(qs, cfg, p.r, p.s0);
    CHECK(cal.report.mean_rel_abs_error <= 0.015);

    // bounds hold everywhere on the grid
    const LocalVolSurface& surf = *cal.surface;
    for (std::size_t j = 0; j < surf.time_grid().size(); j += 25) {
        for (std::size_t i = 0; i < surf.x_grid().size(); i += 50) {
            const double sig = surf.sigma_at_node(j, i);
            CHECK(sig >= kSigmaMin - 1e-12);
            CHECK(sig <= kSigmaMax + 1e-12);
        }
    }
    // skew direction near the money: negative correlation means local
    // vol falls with S
    CHECK(surf.sigma(0.5, 8.5) > surf.sigma(0.5, 11.5));
}

TEST_CASE("recalibration at the initial state recovers the ATM vol") {
    // parity transfers the call's implied vol to the put
    const HestonParams p = base_case_params();
    const double sigma = recalibrate_bs_on_path(0.0, p.s0, p.v0, p, 10.0, 1.0);
    CHECK(sigma == doctest::Approx(0.3699704).epsilon(2e-5));
}

TEST_CASE("recalibration near the long-run variance tracks sqrt(theta)") {
    HestonParams p = base_case_params();
    const double sigma = recalibrate_bs_on_path(0.0, p.s0, p.theta, p, 10.0, 1.0);
    CHECK(sigma > 0.9 * std::sqrt(p.theta));
    CHECK(sigma < 1.1 * std::sqrt(p.theta));
}

TEST_CASE("degenerate vol-of-vol recalibration returns sqrt(v0) for short maturities") {
    HestonParams p = base_case_params();
    p.sigma_v = 0.0;
    p.kappa = 1e-8;  // nearly frozen variance
    const double sigma = recalibrate_bs_on_path(0.0, p.s0, p.v0, p, 10.0, 0.05);
    CHECK(sigma == doctest::Approx(std::sqrt(p.v0)).epsilon(1e-4 / 0.25));
}

TEST_CASE("recalibration signals when the put price pins the parity bound") {
    const HestonParams p = base_case_params();
    // deep ITM with a hair of maturity left: price within tolerance of
    // the lower bound, no implied volatility exists
    CHECK_THROWS_AS(recalibrate_bs_on_path(1.0 - 1e-7, 0.5, 1e-4, p, 10.0, 1.0),
                    ImpliedVolDomainError);
}
