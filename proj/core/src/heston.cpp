#include "amrisk/heston.hpp"

#include <cmath>
#include <complex>
#include <functional>

#include "amrisk/linalg.hpp"

namespace amrisk {

HestonParams base_case_params(double rho) {
    return HestonParams{5.0, 0.16, 0.9, rho, 0.1, 10.0, 0.0625};
}

namespace {

using cd = std::complex<double>;

// Characteristic function of ln S(T) in the branch-cut-stable form of
// Albrecher et al.; evaluated at u in the complex plane.
cd heston_cf(const HestonParams& p, double tau, double spot, double v, cd u) {
    const cd iu = cd(0.0, 1.0) * u;
    const double sv = p.sigma_v;
    const cd beta = p.kappa - p.rho * sv * iu;
    const cd d = std::sqrt(beta * beta + sv * sv * (iu + u * u));
    const cd g = (beta - d) / (beta + d);
    const cd emdt = std::exp(-d * tau);
    const cd log_term = std::log((1.0 - g * emdt) / (1.0 - g));
    const cd big_c = (p.kappa * p.theta / (sv * sv)) * ((beta - d) * tau - 2.0 * log_term);
    const cd big_d = ((beta - d) / (sv * sv)) * (1.0 - emdt) / (1.0 - g * emdt);
    return std::exp(iu * (std::log(spot) + p.r * tau) + big_c + big_d * v);
}

struct AdaptiveSimpson {
    const std::function<double(double)>& f;
    double tol;
    int max_depth;
    mutable bool failed = false;

    double run(double a, double b) const {
        const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
        return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, max_depth);
    }

    static double simpson(double a, double b, double fa, double fm, double fb) {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole,
                   double eps, int depth) const {
        const double m = 0.5 * (a + b);
        const double flm = f(0.5 * (a + m));
        const double frm = f(0.5 * (m + b));
        const double left = simpson(a, m, fa, flm, fm);
        const double right = simpson(m, b, fm, frm, fb);
        const double delta = left + right - whole;
        if (std::fabs(delta) <= 15.0 * eps || depth <= 0) {
            if (depth <= 0 && std::fabs(delta) > 15.0 * eps) failed = true;
            return left + right + delta / 15.0;
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
    }
};

double integrate_probability(const std::function<double(double)>& integrand) {
    AdaptiveSimpson quad{integrand, 1e-9, 28};
    double total = 0.0;
    double lo = 1e-10;
    double hi = 32.0;
    for (int panel = 0; panel < 12; ++panel) {
        const double part = quad.run(lo, hi);
        total += part;
        if (std::fabs(part) < 1e-12 && panel > 1) break;
        lo = hi;
        hi *= 2.0;
    }
    if (quad.failed) {
        throw NumericalError("heston pricer: adaptive quadrature did not reach tolerance");
    }
    return total;
}

// Deterministic-variance limit: total variance integrates the mean path.
double degenerate_price(const HestonParams& p, const OptionSpec& spec, double tau,
                        double spot, double v) {
    const double integrated =
        p.theta * tau + (v - p.theta) * (1.0 - std::exp(-p.kappa * tau)) / p.kappa;
    OptionSpec call = spec;
    call.maturity = tau;
    call.kind = OptionKind::Call;
    return bs_price(std::sqrt(integrated / tau), p.r, spot, call);
}

}  // namespace

double heston_european_call(const HestonParams& p, const OptionSpec& spec,
                            double t, double spot, double v) {
    p.validate();
    spec.validate();
    if (spec.style != ExerciseStyle::European) {
        throw std::invalid_argument("heston_european_call: spec must be European");
    }
    if (!(t < spec.maturity)) {
        throw std::invalid_argument("heston_european_call: need t < maturity");
    }
    if (!(spot > 0.0) || v < 0.0) {
        throw std::invalid_argument("heston_european_call: bad state");
    }
    const double tau = spec.maturity - t;
    if (p.sigma_v < 1e-8) return degenerate_price(p, spec, tau, spot, v);

    const double k = std::log(spec.strike);
    const double fwd = spot * std::exp(p.r * tau);

    const auto p2_integrand = [&](double u) {
        const cd phi = heston_cf(p, tau, spot, v, cd(u, 0.0));
        return std::real(std::exp(cd(0.0, -u * k)) * phi / cd(0.0, u));
    };
    const auto p1_integrand = [&](double u) {
        const cd phi = heston_cf(p, tau, spot, v, cd(u, -1.0));
        return std::real(std::exp(cd(0.0, -u * k)) * phi / (cd(0.0, u) * fwd));
    };

    const double pi = 3.14159265358979323846;
    const double p1 = 0.5 + integrate_probability(p1_integrand) / pi;
    const double p2 = 0.5 + integrate_probability(p2_integrand) / pi;
    return spot * p1 - spec.strike * std::exp(-p.r * tau) * p2;
}

double heston_european_put(const HestonParams& p, const OptionSpec& spec,
                           double t, double spot, double v) {
    OptionSpec call = spec;
    call.kind = OptionKind::Call;
    const double c = heston_european_call(p, call, t, spot, v);
    const double tau = spec.maturity - t;
    return c - spot + spec.strike * std::exp(-p.r * tau);
}

}  // namespace amrisk
