#include "amrisk/black_scholes.hpp"

#include <algorithm>
#include <cmath>

#include "amrisk/linalg.hpp"

namespace amrisk {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bs_price(double sigma, double r, double spot, const OptionSpec& spec) {
    spec.validate();
    if (!(spot > 0.0)) throw std::invalid_argument("bs_price: spot must be positive");
    if (sigma < 0.0) throw std::invalid_argument("bs_price: sigma must be nonnegative");

    const double K = spec.strike;
    const double T = spec.maturity;
    const double df = std::exp(-r * T);
    if (sigma == 0.0) {
        const double fwd_payoff = (spec.kind == OptionKind::Call) ? spot - K * df : K * df - spot;
        return std::max(fwd_payoff, 0.0);
    }
    const double vol = sigma * std::sqrt(T);
    const double d1 = (std::log(spot / K) + (r + 0.5 * sigma * sigma) * T) / vol;
    const double d2 = d1 - vol;
    if (spec.kind == OptionKind::Call) {
        return spot * norm_cdf(d1) - K * df * norm_cdf(d2);
    }
    return K * df * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

double implied_vol(double price, double r, double spot, const OptionSpec& spec) {
    spec.validate();
    const double df = std::exp(-r * spec.maturity);
    const double K = spec.strike;
    double lo_bound, hi_bound;
    if (spec.kind == OptionKind::Call) {
        lo_bound = std::max(spot - K * df, 0.0);
        hi_bound = spot;
    } else {
        lo_bound = std::max(K * df - spot, 0.0);
        hi_bound = K * df;
    }
    if (!(price > lo_bound) || !(price < hi_bound)) {
        throw ImpliedVolDomainError("implied_vol: price outside arbitrage bounds");
    }

    double a = 1e-6, b = 6.0;
    double fa = bs_price(a, r, spot, spec) - price;
    double fb = bs_price(b, r, spot, spec) - price;
    if (fa > 0.0 || fb < 0.0) {
        // Vegas vanish at the bracket ends for extreme prices; the bound
        // check above makes this unreachable for sane inputs.
        throw ImpliedVolDomainError("implied_vol: root not bracketed in [1e-6, 6]");
    }

    const double tol = 1e-10;
    double mid = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        // Secant proposal, safeguarded by bisection.
        double prop = (fb != fa) ? a - fa * (b - a) / (fb - fa) : mid;
        if (!(prop > a) || !(prop < b)) prop = 0.5 * (a + b);
        const double fp = bs_price(prop, r, spot, spec) - price;
        if (std::fabs(fp) <= tol) return prop;
        if (fp < 0.0) {
            a = prop;
            fa = fp;
        } else {
            b = prop;
            fb = fp;
        }
        mid = 0.5 * (a + b);
        if (b - a < 1e-16) {
            if (std::fabs(fa) <= tol || std::fabs(fb) <= tol) return mid;
            break;
        }
    }
    throw NumericalError("implied_vol: no convergence after 200 iterations");
}

}  // namespace amrisk
