#pragma once

#include <memory>
#include <string>
#include <vector>

#include "amrisk/local_vol.hpp"
#include "amrisk/pde1d.hpp"
#include "amrisk/quotes.hpp"

namespace amrisk {

struct QuoteError {
    double strike;
    double maturity;
    double market;
    double model;
    double rel_abs_error;
};

struct CalibrationReport {
    std::vector<QuoteError> per_quote;
    double mean_rel_abs_error = 0.0;
};

void write_report_json(const CalibrationReport& report, const std::string& path);

/// ATM calibration: implied volatility of the reference quote.
double calibrate_black_scholes(const QuoteSurface& quotes, double ref_strike,
                               double ref_maturity, double r, double spot);

struct DupireCalibConfig {
    Solver1DConfig solver;  // lambda1 stays 0.5 (semi-implicit forward system)
    /// Knots of the sigma parameterization in the strike direction; the
    /// two-step spline extends them to the whole grid.
    std::vector<double> param_strikes = {6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.5};
    double region_x_min = 0.6931471805599453;   // log 2
    double region_x_max = 2.995732273553991;    // log 20
    double tikhonov = 1e-3;  // weak pull toward the seed surface
    /// Slope-difference penalties across strike knots and across pillar
    /// maturities; they identify the knots the quotes barely see (outer
    /// strikes, first pillar) without flattening the data-driven skew.
    double smooth_strike = 0.04;
    double smooth_pillar = 0.04;
    std::size_t max_gauss_newton = 12;
    double fd_step = 1e-4;
};

struct DupireCalibration {
    std::shared_ptr<const LocalVolSurface> surface;
    CalibrationReport report;
    std::vector<double> pillar_maturities;
    std::vector<double> param_strikes;
    std::vector<double> fitted_sigmas;  // strike-major over pillars
};

/// Local-volatility calibration to the quote surface: two-step bicubic
/// spline fit of the quotes, a seed surface from the forward-equation
/// ratio of spline derivatives, then bound-constrained least-squares
/// refinement of the sigma knots against the quotes repriced through the
/// discretized forward (Fokker-Planck adjoint) system. Values outside
/// the optimization region come from the spline tails, clamped to the
/// hard bounds.
DupireCalibration calibrate_dupire(const QuoteSurface& quotes, const DupireCalibConfig& cfg,
                                   double r, double spot);

/// Implied volatility of the Heston European put with the American
/// put's strike and maturity, evaluated at a path state. Throws
/// ImpliedVolDomainError when the price sits on an arbitrage bound
/// (deep ITM near expiry); callers keep the previous volatility.
double recalibrate_bs_on_path(double t, double spot, double v, const HestonParams& p,
                              double strike, double maturity);

}  // namespace amrisk
