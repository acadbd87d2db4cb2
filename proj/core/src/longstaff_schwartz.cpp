#include "amrisk/longstaff_schwartz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amrisk/rng.hpp"

namespace amrisk {

namespace {

struct NormalStream {
    Xoshiro256 rng;
    bool cached = false;
    double second = 0.0;

    explicit NormalStream(std::uint64_t seed, std::uint64_t stream) : rng(seed, stream) {}

    double next() {
        if (cached) {
            cached = false;
            return second;
        }
        double z0;
        rng.normal_pair(z0, second);
        cached = true;
        return z0;
    }
};

double truncated_normal_start(NormalStream& ns, double mean, double sd) {
    for (int tries = 0; tries < 1000; ++tries) {
        const double s = mean + sd * ns.next();
        if (s > 0.0) return s;
    }
    throw std::runtime_error("ls: start-value sampling failed");
}

// Gaussian elimination with partial pivoting; false on rank deficiency.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t rr = col + 1; rr < n; ++rr) {
            if (std::fabs(a[rr * n + col]) > std::fabs(a[piv * n + col])) piv = rr;
        }
        if (std::fabs(a[piv * n + col]) < 1e-12 * scale) return false;
        if (piv != col) {
            for (std::size_t cc = 0; cc < n; ++cc) std::swap(a[col * n + cc], a[piv * n + cc]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t rr = col + 1; rr < n; ++rr) {
            const double f = a[rr * n + col] / a[col * n + col];
            for (std::size_t cc = col; cc < n; ++cc) a[rr * n + cc] -= f * a[col * n + cc];
            b[rr] -= f * b[col];
        }
    }
    for (std::size_t rr = n; rr-- > 0;) {
        double s = b[rr];
        for (std::size_t cc = rr + 1; cc < n; ++cc) s -= a[rr * n + cc] * b[cc];
        b[rr] = s / a[rr * n + rr];
    }
    return true;
}

constexpr std::size_t kPowers = 8;

void basis_powers(double u, double* phi) {
    double p = 1.0;
    for (std::size_t k = 0; k < kPowers; ++k) {
        p *= u;
        phi[k] = p;
    }
}

constexpr std::size_t kHestonBasis = 6;

void basis_heston(double u, double v, double* phi) {
    phi[0] = u;
    phi[1] = u * u;
    phi[2] = u * u * u;
    phi[3] = v;
    phi[4] = u * v;
    phi[5] = u * u * v;
}

// Largest s below the strike where intrinsic meets the fitted
// continuation; zero when the continuation dominates everywhere.
template <typename Continuation>
double boundary_root(double strike, const Continuation& cont) {
    constexpr int kScan = 2000;
    for (int k = kScan; k >= 1; --k) {
        const double s = strike * (static_cast<double>(k) - 0.5) / static_cast<double>(kScan);
        if (strike - s >= cont(s)) return s;
    }
    return 0.0;
}

}  // namespace

ExerciseBoundary1D ls_boundary_1d(const LocalVolFn& vol, double r, double strike,
                                  double maturity, const LSConfig& cfg) {
    if (cfg.n_paths < kPowers + 1 || cfg.n_steps < 1) {
        throw std::invalid_argument("ls: degenerate configuration");
    }
    const std::size_t n = cfg.n_steps;
    const std::size_t row = n + 1;
    const double dt = maturity / static_cast<double>(n);
    const double sdt = std::sqrt(dt);

    std::vector<double> spot(cfg.n_paths * row);
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        NormalStream ns(cfg.seed, p);
        double s = truncated_normal_start(ns, cfg.start_mean, cfg.start_sd);
        double x = std::log(s);
        double* sr = spot.data() + p * row;
        sr[0] = s;
        for (std::size_t j = 0; j < n; ++j) {
            const double sig = vol.sigma(dt * static_cast<double>(j), sr[j]);
            x += (r - 0.5 * sig * sig) * dt + sig * sdt * ns.next();
            sr[j + 1] = std::exp(x);
        }
    }

    std::vector<double> cashflow(cfg.n_paths);
    std::vector<double> pay_time(cfg.n_paths, maturity);
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        cashflow[p] = std::max(strike - spot[p * row + n], 0.0);
    }

    ExerciseBoundary1D out;
    out.times.resize(n + 1);
    out.values.assign(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) out.times[j] = dt * static_cast<double>(j);
    out.values[n] = strike;

    double carried = strike;
    std::vector<double> beta(kPowers, 0.0);
    for (std::size_t j = n; j-- > 0;) {
        const double t = dt * static_cast<double>(j);
        std::vector<double> gram(kPowers * kPowers, 0.0);
        std::vector<double> rhs(kPowers, 0.0);
        double phi[kPowers];
        std::size_t used = 0;
        for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            const double s = spot[p * row + j];
            if (cfg.itm_only && !(strike - s > 0.0)) continue;
            const double y = cashflow[p] * std::exp(-r * (pay_time[p] - t));
            basis_powers(s / strike, phi);
            for (std::size_t a = 0; a < kPowers; ++a) {
                rhs[a] += phi[a] * y;
                for (std::size_t b = a; b < kPowers; ++b) gram[a * kPowers + b] += phi[a] * phi[b];
            }
            ++used;
        }
        for (std::size_t a = 0; a < kPowers; ++a) {
            for (std::size_t b = 0; b < a; ++b) gram[a * kPowers + b] = gram[b * kPowers + a];
        }
        if (used <= kPowers || !solve_dense(gram, rhs, kPowers)) {
            out.values[j] = carried;  // rank-deficient step: keep the later boundary
            continue;
        }
        beta = rhs;

        auto continuation = [&](double s) {
            double phi2[kPowers];
            basis_powers(s / strike, phi2);
            double c = 0.0;
            for (std::size_t a = 0; a < kPowers; ++a) c += beta[a] * phi2[a];
            return c;
        };
        for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            const double s = spot[p * row + j];
            const double intrinsic = strike - s;
            if (!(intrinsic > 0.0)) continue;
            if (intrinsic >= continuation(s)) {
                cashflow[p] = intrinsic;
                pay_time[p] = t;
            }
        }
        carried = boundary_root(strike, continuation);
        out.values[j] = carried;
    }
    return out;
}

ExerciseBoundary2D ls_boundary_heston(const HestonParams& p, double strike, double maturity,
                                      const LSConfig& cfg, const std::vector<double>& v_knots) {
    p.validate();
    if (v_knots.size() < 2) throw std::invalid_argument("ls heston: need >= 2 variance knots");
    const std::size_t n = cfg.n_steps;
    const std::size_t row = n + 1;
    const double dt = maturity / static_cast<double>(n);
    const double sdt = std::sqrt(dt);
    const double rho_c = std::sqrt(1.0 - p.rho * p.rho);
    const double mil = 0.25 * p.sigma_v * p.sigma_v;

    std::vector<double> spot(cfg.n_paths * row), var(cfg.n_paths * row);
    for (std::size_t pth = 0; pth < cfg.n_paths; ++pth) {
        NormalStream ns(cfg.seed, pth);
        double s0 = truncated_normal_start(ns, cfg.start_mean, cfg.start_sd);
        double x = std::log(s0);
        double v = p.v0;
        double* sr = spot.data() + pth * row;
        double* vr = var.data() + pth * row;
        sr[0] = s0;
        vr[0] = v;
        for (std::size_t j = 0; j < n; ++j) {
            const double z0 = ns.next();
            const double z1 = ns.next();
            const double dw1 = sdt * z0;
            const double dwv = sdt * (p.rho * z0 + rho_c * z1);
            const double vp = std::max(v, 0.0);
            const double sq = std::sqrt(vp);
            x += (p.r - 0.5 * vp) * dt + sq * dw1;
            v += p.kappa * (p.theta - vp) * dt + p.sigma_v * sq * dwv + mil * (dwv * dwv - dt);
            v = std::max(v, 0.0);
            sr[j + 1] = std::exp(x);
            vr[j + 1] = v;
        }
    }

    std::vector<double> cashflow(cfg.n_paths);
    std::vector<double> pay_time(cfg.n_paths, maturity);
    for (std::size_t pth = 0; pth < cfg.n_paths; ++pth) {
        cashflow[pth] = std::max(strike - spot[pth * row + n], 0.0);
    }

    std::vector<double> times(n + 1);
    for (std::size_t j = 0; j <= n; ++j) times[j] = dt * static_cast<double>(j);
    std::vector<double> raw((n + 1) * v_knots.size(), 0.0);
    for (std::size_t k = 0; k < v_knots.size(); ++k) raw[n * v_knots.size() + k] = strike;

    std::vector<double> carried(v_knots.size(), strike);
    for (std::size_t j = n; j-- > 0;) {
        const double t = dt * static_cast<double>(j);
        std::vector<double> gram(kHestonBasis * kHestonBasis, 0.0);
        std::vector<double> rhs(kHestonBasis, 0.0);
        double phi[kHestonBasis];
        std::size_t used = 0;
        for (std::size_t pth = 0; pth < cfg.n_paths; ++pth) {
            const double s = spot[pth * row + j];
            if (cfg.itm_only && !(strike - s > 0.0)) continue;
            const double y = cashflow[pth] * std::exp(-p.r * (pay_time[pth] - t));
            basis_heston(s / strike, var[pth * row + j], phi);
            for (std::size_t a = 0; a < kHestonBasis; ++a) {
                rhs[a] += phi[a] * y;
                for (std::size_t b = a; b < kHestonBasis; ++b) {
                    gram[a * kHestonBasis + b] += phi[a] * phi[b];
                }
            }
            ++used;
        }
        for (std::size_t a = 0; a < kHestonBasis; ++a) {
            for (std::size_t b = 0; b < a; ++b) gram[a * kHestonBasis + b] = gram[b * kHestonBasis + a];
        }
        if (used <= kHestonBasis || !solve_dense(gram, rhs, kHestonBasis)) {
            for (std::size_t k = 0; k < v_knots.size(); ++k) {
                raw[j * v_knots.size() + k] = carried[k];
            }
            continue;
        }
        const std::vector<double> beta = rhs;

        auto continuation = [&](double s, double v) {
            double phi2[kHestonBasis];
            basis_heston(s / strike, v, phi2);
            double c = 0.0;
            for (std::size_t a = 0; a < kHestonBasis; ++a) c += beta[a] * phi2[a];
            return c;
        };
        for (std::size_t pth = 0; pth < cfg.n_paths; ++pth) {
            const double s = spot[pth * row + j];
            const double intrinsic = strike - s;
            if (!(intrinsic > 0.0)) continue;
            if (intrinsic >= continuation(s, var[pth * row + j])) {
                cashflow[pth] = intrinsic;
                pay_time[pth] = t;
            }
        }
        for (std::size_t k = 0; k < v_knots.size(); ++k) {
            const double vk = v_knots[k];
            carried[k] = boundary_root(strike, [&](double s) { return continuation(s, vk); });
            raw[j * v_knots.size() + k] = carried[k];
        }
    }
    return ExerciseBoundary2D(std::move(times), std::vector<double>(v_knots), std::move(raw),
                              strike);
}

}  // namespace amrisk
