#pragma once

#include <stdexcept>

#include "amrisk/black_scholes.hpp"

namespace amrisk {

/// Coefficients of the benchmark stochastic-volatility model
///   dS = r S dt + sqrt(v) S dW1
///   dv = kappa (theta - v) dt + sigma_v sqrt(v) (rho dW1 + sqrt(1-rho^2) dW2).
struct HestonParams {
    double kappa = 0.0;    // mean-reversion rate (1/year)
    double theta = 0.0;    // long-run variance
    double sigma_v = 0.0;  // vol-of-vol
    double rho = 0.0;      // correlation in (-1, 1)
    double r = 0.0;        // risk-free rate (1/year)
    double s0 = 0.0;       // spot
    double v0 = 0.0;       // initial variance

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("heston: kappa must be positive");
        if (!(theta > 0.0)) throw std::invalid_argument("heston: theta must be positive");
        if (sigma_v < 0.0) throw std::invalid_argument("heston: sigma_v must be nonnegative");
        if (!(2.0 * kappa * theta > sigma_v * sigma_v)) {
            throw std::invalid_argument("heston: Feller condition 2*kappa*theta > sigma_v^2 violated");
        }
        if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("heston: rho must be in (-1,1)");
        if (r < 0.0) throw std::invalid_argument("heston: r must be nonnegative");
        if (!(s0 > 0.0)) throw std::invalid_argument("heston: s0 must be positive");
        if (!(v0 > 0.0)) throw std::invalid_argument("heston: v0 must be positive");
    }
};

/// Base case of the study: kappa=5, theta=0.16, sigma_v=0.9, rho=-0.5,
/// r=0.1, S(0)=10, v(0)=0.0625.
HestonParams base_case_params(double rho = -0.5);

/// European call price at state (t, S, v) by characteristic-function
/// integration (branch-cut-stable formulation, adaptive quadrature with
/// absolute tolerance 1e-8). Deterministic; integration failures throw.
double heston_european_call(const HestonParams& p, const OptionSpec& spec,
                            double t, double spot, double v);

/// European put via put-call parity.
double heston_european_put(const HestonParams& p, const OptionSpec& spec,
                           double t, double spot, double v);

}  // namespace amrisk
