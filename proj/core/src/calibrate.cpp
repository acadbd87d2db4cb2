#include "amrisk/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "amrisk/bounded_ls.hpp"
#include "amrisk/linalg.hpp"
#include "amrisk/spline.hpp"

namespace amrisk {

void write_report_json(const CalibrationReport& report, const std::string& path) {
    nlohmann::json j;
    j["mean_rel_abs_error"] = report.mean_rel_abs_error;
    j["quotes"] = nlohmann::json::array();
    for (const QuoteError& q : report.per_quote) {
        j["quotes"].push_back({{"strike", q.strike},
                               {"maturity", q.maturity},
                               {"market", q.market},
                               {"model", q.model},
                               {"rel_abs_error", q.rel_abs_error}});
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << j.dump(2) << '\n';
}

double calibrate_black_scholes(const QuoteSurface& quotes, double ref_strike,
                               double ref_maturity, double r, double spot) {
    const Quote& q = quotes.find(ref_strike, ref_maturity);
    OptionSpec spec{ref_strike, ref_maturity, OptionKind::Call, ExerciseStyle::European};
    return implied_vol(q.price, r, spot, spec);
}

namespace {

// sigma parameter block: strike-major over pillar maturities.
struct SigmaParams {
    std::vector<double> strikes;
    std::vector<double> pillars;
    std::vector<double> sigma;  // strikes.size() x pillars.size()

    double& at(std::size_t k, std::size_t m) { return sigma[k * pillars.size() + m]; }
    double at(std::size_t k, std::size_t m) const { return sigma[k * pillars.size() + m]; }
};

// Two-step spline extension of the sigma knots onto the solver lattice,
// clamped to the hard bounds; returns local variance, time-major.
std::vector<double> build_variance_grid(const Grid1D& tg, const Grid1D& xg,
                                        const SigmaParams& par) {
    const std::size_t nt = tg.size();
    const std::size_t nx = xg.size();
    const std::size_t nm = par.pillars.size();

    std::vector<double> sig_pillar(nm * nx);
    for (std::size_t m = 0; m < nm; ++m) {
        std::vector<double> col(par.strikes.size());
        for (std::size_t k = 0; k < par.strikes.size(); ++k) col[k] = par.at(k, m);
        CubicSpline ks(par.strikes, std::move(col));
        for (std::size_t i = 0; i < nx; ++i) {
            sig_pillar[m * nx + i] = std::clamp(ks(std::exp(xg[i])), kSigmaMin, kSigmaMax);
        }
    }

    std::vector<double> var(nt * nx);
    std::vector<double> sec(nm);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t m = 0; m < nm; ++m) sec[m] = sig_pillar[m * nx + i];
        CubicSpline ts(par.pillars, sec);
        for (std::size_t j = 0; j < nt; ++j) {
            const double s = std::clamp(ts(tg[j]), kSigmaMin, kSigmaMax);
            var[j * nx + i] = s * s;
        }
    }
    return var;
}

// Discrete forward system: the adjoint of the backward pricing scheme
// propagates state prices from the spot readout; one sweep prices every
// quote. Boundary contributions are dropped (no mass reaches the edges
// of the wide log-price grid).
struct ForwardRepricer {
    Grid1D xg;
    std::size_t n1;
    double dt, r, lambda1, spot;
    std::vector<std::size_t> pillar_steps;
    std::vector<double> strikes;

    // prices indexed [pillar][strike]
    std::vector<std::vector<double>> reprice(const std::vector<double>& var_grid) const {
        const std::size_t nx = xg.size();
        const std::size_t ni = nx - 2;
        const double dx = xg.spacing(1);
        const double alpha = dt / (dx * dx);
        const double th = 1.0 - lambda1;

        std::vector<double> lam(ni, 0.0);
        {
            const double xq = std::log(spot);
            std::size_t i = xg.locate(xq);
            i = std::clamp<std::size_t>(i, 1, nx - 3);
            const double w = (xq - xg[i]) / xg.spacing(i + 1);
            lam[i - 1] = 1.0 - w;
            lam[i] = w;
        }

        std::vector<double> l(ni), c(ni), u(ni), rvec(ni), lam_next(ni), scratch(ni);
        TridiagonalMatrix pt{std::vector<double>(ni - 1), std::vector<double>(ni),
                             std::vector<double>(ni - 1)};
        std::vector<std::vector<double>> prices(pillar_steps.size());

        for (std::size_t j = 0; j < n1; ++j) {
            const double* vrow = var_grid.data() + j * nx;
            for (std::size_t k = 0; k < ni; ++k) {
                const double v = vrow[k + 1];
                const double w = r - 0.5 * v;
                l[k] = 0.5 * alpha * (v - dx * w);
                c[k] = -alpha * v;
                u[k] = 0.5 * alpha * (v + dx * w);
            }
            // transpose of (1 + r dt) I - (1 - lambda1) M
            for (std::size_t k = 0; k < ni; ++k) {
                pt.diag[k] = 1.0 + r * dt - th * c[k];
                if (k + 1 < ni) {
                    pt.lower[k] = -th * u[k];      // (P^T)_{k+1,k} = P_{k,k+1}
                    pt.upper[k] = -th * l[k + 1];  // (P^T)_{k,k+1} = P_{k+1,k}
                }
            }
            solve_tridiagonal(pt, lam.data(), rvec.data(), scratch.data());
            for (std::size_t k = 0; k < ni; ++k) {
                double mtr = c[k] * rvec[k];
                if (k > 0) mtr += u[k - 1] * rvec[k - 1];
                if (k + 1 < ni) mtr += l[k + 1] * rvec[k + 1];
                lam_next[k] = rvec[k] + lambda1 * mtr;
            }
            lam.swap(lam_next);

            for (std::size_t ps = 0; ps < pillar_steps.size(); ++ps) {
                if (pillar_steps[ps] != j + 1) continue;
                std::vector<double>& row = prices[ps];
                row.assign(strikes.size(), 0.0);
                for (std::size_t k = 0; k < ni; ++k) {
                    const double s = std::exp(xg[k + 1]);
                    const double mass = lam[k];
                    if (mass == 0.0) continue;
                    for (std::size_t q = 0; q < strikes.size(); ++q) {
                        if (s > strikes[q]) row[q] += mass * (s - strikes[q]);
                    }
                }
            }
        }
        return prices;
    }
};

// Seed surface: ratio of spline-surface derivatives from the forward
// equation for call prices, with nearest-valid fill where the quote
// lattice carries no curvature.
SigmaParams seed_from_price_surface(const SplineSurface& psurf, const SigmaParams& shape,
                                    double r, double spot) {
    SigmaParams out = shape;
    const std::size_t nm = out.pillars.size();
    const double kmin = psurf.strikes().front();
    const double kmax = psurf.strikes().back();

    for (std::size_t m = 0; m < nm; ++m) {
        const double T = out.pillars[m];
        std::vector<double> vals(out.strikes.size(), -1.0);
        for (std::size_t k = 0; k < out.strikes.size(); ++k) {
            const double K = out.strikes[k];
            if (K < kmin || K > kmax) continue;
            const double num = psurf.d_maturity(K, T) + r * K * psurf.d_strike(K, T);
            const double den = 0.5 * K * K * psurf.d2_strike(K, T);
            if (den <= 1e-12) continue;
            const double v = num / den;
            if (v >= 1e-4 && v <= 36.0) vals[k] = std::sqrt(v);
        }
        double atm_fallback;
        try {
            OptionSpec spec{spot, T, OptionKind::Call, ExerciseStyle::European};
            atm_fallback = implied_vol(psurf(spot, T), r, spot, spec);
        } catch (const std::exception&) {
            atm_fallback = 0.3;
        }
        for (std::size_t k = 0; k < vals.size(); ++k) {
            if (vals[k] > 0.0) continue;
            double best = atm_fallback;
            double best_dist = 1e300;
            for (std::size_t k2 = 0; k2 < vals.size(); ++k2) {
                if (vals[k2] > 0.0 && std::fabs(out.strikes[k2] - out.strikes[k]) < best_dist) {
                    best_dist = std::fabs(out.strikes[k2] - out.strikes[k]);
                    best = vals[k2];
                }
            }
            vals[k] = best;
        }
        for (std::size_t k = 0; k < vals.size(); ++k) {
            out.at(k, m) = std::clamp(vals[k], kSigmaMin, kSigmaMax);
        }
    }
    return out;
}

}  // namespace

DupireCalibration calibrate_dupire(const QuoteSurface& quotes, const DupireCalibConfig& cfg,
                                   double r, double spot) {
    cfg.solver.validate();
    const std::vector<double> Ks = quotes.strikes();
    const std::vector<double> Ts = quotes.maturities();
    if (Ts.size() < 2) {
        throw std::invalid_argument("dupire calibration: quotes must span >= 2 maturities");
    }

    std::vector<double> grid(Ks.size() * Ts.size());
    for (std::size_t i = 0; i < Ks.size(); ++i) {
        for (std::size_t m = 0; m < Ts.size(); ++m) {
            grid[i * Ts.size() + m] = quotes.find(Ks[i], Ts[m]).price;
        }
    }
    const SplineSurface psurf(Ks, Ts, grid);

    const double t_max = Ts.back();
    const Grid1D tg = cfg.solver.time_grid(t_max);
    const Grid1D xg = cfg.solver.x_grid();
    const double dt = t_max / static_cast<double>(cfg.solver.n1);

    ForwardRepricer repricer;
    repricer.xg = xg;
    repricer.n1 = cfg.solver.n1;
    repricer.dt = dt;
    repricer.r = r;
    repricer.lambda1 = cfg.solver.lambda1;
    repricer.spot = spot;
    repricer.strikes = Ks;
    repricer.pillar_steps.resize(Ts.size());
    for (std::size_t m = 0; m < Ts.size(); ++m) {
        const auto step = std::llround(Ts[m] / dt);
        if (step < 1 || std::fabs(static_cast<double>(step) * dt - Ts[m]) > 1e-9) {
            throw std::invalid_argument("dupire calibration: maturity off the time grid");
        }
        repricer.pillar_steps[m] = static_cast<std::size_t>(step);
    }

    SigmaParams shape;
    shape.strikes = cfg.param_strikes;
    shape.pillars = Ts;
    shape.sigma.assign(shape.strikes.size() * Ts.size(), 0.3);
    SigmaParams prior = seed_from_price_surface(psurf, shape, r, spot);

    const std::size_t np = prior.sigma.size();
    const std::size_t nq = quotes.quotes.size();
    std::vector<double> market(nq);
    std::vector<std::pair<std::size_t, std::size_t>> quote_index(nq);  // (strike, pillar)
    for (std::size_t q = 0; q < nq; ++q) {
        const Quote& qt = quotes.quotes[q];
        market[q] = qt.price;
        const auto ki = std::find(Ks.begin(), Ks.end(), qt.strike) - Ks.begin();
        const auto mi = std::find(Ts.begin(), Ts.end(), qt.maturity) - Ts.begin();
        quote_index[q] = {static_cast<std::size_t>(ki), static_cast<std::size_t>(mi)};
    }

    const std::size_t nk = shape.strikes.size();
    const std::size_t nm = Ts.size();
    const double sqrt_mu = std::sqrt(cfg.tikhonov);
    const double sqrt_sk = std::sqrt(cfg.smooth_strike);
    const double sqrt_sp = std::sqrt(cfg.smooth_pillar);
    const std::size_t n_smooth_k = (nk >= 3) ? (nk - 2) * nm : 0;
    const std::size_t n_smooth_m = (nm >= 3) ? nk * (nm - 2) : 0;
    const std::size_t nrows = nq + np + n_smooth_k + n_smooth_m;

    auto residuals = [&](const std::vector<double>& theta) {
        SigmaParams par = prior;
        par.sigma = theta;
        const std::vector<double> var = build_variance_grid(tg, xg, par);
        const auto prices = repricer.reprice(var);
        std::vector<double> res(nrows);
        for (std::size_t q = 0; q < nq; ++q) {
            res[q] = prices[quote_index[q].second][quote_index[q].first] - market[q];
        }
        for (std::size_t pidx = 0; pidx < np; ++pidx) {
            res[nq + pidx] = sqrt_mu * (theta[pidx] - prior.sigma[pidx]);
        }
        std::size_t row = nq + np;
        const auto th = [&](std::size_t k, std::size_t m) { return theta[k * nm + m]; };
        for (std::size_t k = 1; k + 1 < nk; ++k) {
            for (std::size_t m = 0; m < nm; ++m) {
                const double sl =
                    (th(k, m) - th(k - 1, m)) / (shape.strikes[k] - shape.strikes[k - 1]);
                const double sr =
                    (th(k + 1, m) - th(k, m)) / (shape.strikes[k + 1] - shape.strikes[k]);
                res[row++] = sqrt_sk * (sr - sl);
            }
        }
        for (std::size_t k = 0; k < nk; ++k) {
            for (std::size_t m = 1; m + 1 < nm; ++m) {
                const double sl = (th(k, m) - th(k, m - 1)) / (Ts[m] - Ts[m - 1]) * 0.25;
                const double sr = (th(k, m + 1) - th(k, m)) / (Ts[m + 1] - Ts[m]) * 0.25;
                res[row++] = sqrt_sp * (sr - sl);
            }
        }
        return res;
    };
    auto sse = [](const std::vector<double>& res) {
        double s = 0.0;
        for (double v : res) s += v * v;
        return s;
    };

    std::vector<double> theta = prior.sigma;
    std::vector<double> res = residuals(theta);
    double cur_sse = sse(res);
    const std::vector<double> lo(np, kSigmaMin), hi(np, kSigmaMax);

    for (std::size_t iter = 0; iter < cfg.max_gauss_newton; ++iter) {
        DenseMatrix jac{nrows, np, std::vector<double>(nrows * np)};
        for (std::size_t pidx = 0; pidx < np; ++pidx) {
            std::vector<double> bumped = theta;
            bumped[pidx] += cfg.fd_step;
            const std::vector<double> res_b = residuals(bumped);
            for (std::size_t row = 0; row < nrows; ++row) {
                jac.at(row, pidx) = (res_b[row] - res[row]) / cfg.fd_step;
            }
        }
        std::vector<double> target = jac.apply(theta);
        for (std::size_t row = 0; row < nrows; ++row) target[row] -= res[row];

        BoundedLsOptions opts;
        opts.tol = 1e-10;
        BoundedLsResult ls = solve_bound_constrained_ls(jac, target, lo, hi, theta, opts);

        // damped acceptance
        std::vector<double> trial = ls.x;
        std::vector<double> trial_res = residuals(trial);
        double trial_sse = sse(trial_res);
        int backtracks = 0;
        while (trial_sse > cur_sse && backtracks < 8) {
            for (std::size_t pidx = 0; pidx < np; ++pidx) {
                trial[pidx] = 0.5 * (trial[pidx] + theta[pidx]);
            }
            trial_res = residuals(trial);
            trial_sse = sse(trial_res);
            ++backtracks;
        }
        if (trial_sse >= cur_sse * (1.0 - 1e-8)) {
            if (trial_sse < cur_sse) {
                theta = trial;
                res = trial_res;
                cur_sse = trial_sse;
            }
            break;
        }
        theta = trial;
        res = std::move(trial_res);
        cur_sse = trial_sse;
    }

    SigmaParams fitted = prior;
    fitted.sigma = theta;
    std::vector<double> var = build_variance_grid(tg, xg, fitted);
    auto surface = std::make_shared<LocalVolSurface>(tg, xg, std::move(var));
    surface->set_region(RegionMask{Ts.front(), cfg.region_x_min, cfg.region_x_max});

    // score the calibration with the backward solver on each quote
    DupireCalibration out;
    out.surface = surface;
    out.pillar_maturities = Ts;
    out.param_strikes = cfg.param_strikes;
    out.fitted_sigmas = theta;

    const LocalVolFn vol = LocalVolFn::from_surface(surface);
    double err_sum = 0.0;
    for (const Quote& qt : quotes.quotes) {
        Solver1DConfig scfg = cfg.solver;
        scfg.n1 = static_cast<std::size_t>(std::llround(qt.maturity / dt));
        const Solution1D sol = price_european_call_1d(vol, scfg, qt.strike, qt.maturity, r);
        const double model = sol.at_spot(0, spot);
        const double rel = std::fabs(model - qt.price) / qt.price;
        out.report.per_quote.push_back({qt.strike, qt.maturity, qt.price, model, rel});
        err_sum += rel;
    }
    out.report.mean_rel_abs_error = err_sum / static_cast<double>(quotes.quotes.size());
    return out;
}

double recalibrate_bs_on_path(double t, double spot, double v, const HestonParams& p,
                              double strike, double maturity) {
    if (!(t < maturity)) {
        throw std::invalid_argument("recalibrate: need t < maturity");
    }
    OptionSpec full{strike, maturity, OptionKind::Put, ExerciseStyle::European};
    const double price = heston_european_put(p, full, t, spot, v);
    OptionSpec remaining{strike, maturity - t, OptionKind::Put, ExerciseStyle::European};
    return implied_vol(price, p.r, spot, remaining);
}

}  // namespace amrisk
