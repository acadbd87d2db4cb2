#include "amrisk/mc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "amrisk/calibrate.hpp"
#include "amrisk/rng.hpp"

namespace amrisk {

namespace {

void simulate_range(const HestonParams& p, double dt, std::size_t n_steps, std::uint64_t seed,
                    std::size_t first_path, std::size_t lo, std::size_t hi, PathSet& out) {
    const double sqrt_dt = std::sqrt(dt);
    const double rho_c = std::sqrt(1.0 - p.rho * p.rho);
    const double mil = 0.25 * p.sigma_v * p.sigma_v;
    const std::size_t row = n_steps + 1;

    for (std::size_t pth = lo; pth < hi; ++pth) {
        Xoshiro256 rng(seed, first_path + pth);
        double x = std::log(p.s0);
        double v = p.v0;
        double* srow = out.spot.data() + pth * row;
        double* vrow = out.var.data() + pth * row;
        srow[0] = p.s0;
        vrow[0] = v;
        for (std::size_t j = 0; j < n_steps; ++j) {
            double z0, z1;
            rng.normal_pair(z0, z1);
            const double dw1 = sqrt_dt * z0;
            const double dwv = sqrt_dt * (p.rho * z0 + rho_c * z1);
            const double vp = std::max(v, 0.0);
            const double sq = std::sqrt(vp);
            x += (p.r - 0.5 * vp) * dt + sq * dw1;
            v += p.kappa * (p.theta - vp) * dt + p.sigma_v * sq * dwv + mil * (dwv * dwv - dt);
            v = std::max(v, 0.0);
            srow[j + 1] = std::exp(x);
            vrow[j + 1] = v;
        }
    }
}

}  // namespace

PathSet simulate_heston(const HestonParams& p, double maturity, std::size_t n_paths,
                        std::size_t n_steps, std::uint64_t seed, std::size_t first_path,
                        unsigned n_threads) {
    p.validate();
    if (n_steps < 1) throw std::invalid_argument("simulate_heston: need n_steps >= 1");
    if (!(maturity > 0.0)) throw std::invalid_argument("simulate_heston: maturity must be positive");

    PathSet out;
    out.n_paths = n_paths;
    out.n_steps = n_steps;
    out.dt = maturity / static_cast<double>(n_steps);
    out.seed = seed;
    out.first_path = first_path;
    out.spot.resize(n_paths * (n_steps + 1));
    out.var.resize(n_paths * (n_steps + 1));

    if (n_threads <= 1 || n_paths < 2 * n_threads) {
        simulate_range(p, out.dt, n_steps, seed, first_path, 0, n_paths, out);
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_paths + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            simulate_range(p, out.dt, n_steps, seed, first_path, lo, hi, out);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

std::vector<double> PayoffSampleSet::payoffs() const {
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = samples[i].payoff;
    return out;
}

std::vector<double> PayoffSampleSet::stopping_times(bool exercised_only) const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const PayoffSample& s : samples) {
        if (exercised_only && s.stop_step < 0 && s.payoff == 0.0) continue;
        out.push_back(s.tau);
    }
    return out;
}

double PayoffSampleSet::exercised_fraction() const {
    if (samples.empty()) return 0.0;
    std::size_t n = 0;
    for (const PayoffSample& s : samples) {
        if (s.stop_step >= 0 || s.payoff > 0.0) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(samples.size());
}

void PayoffSampleSet::append(const PayoffSampleSet& other) {
    samples.insert(samples.end(), other.samples.begin(), other.samples.end());
}

namespace {

PayoffSample terminal_sample(const PathSet& paths, std::size_t p, double strike, double r) {
    PayoffSample out;
    out.stop_step = -1;
    out.tau = paths.maturity();
    const double intrinsic = std::max(strike - paths.s(p, paths.n_steps), 0.0);
    out.payoff = std::exp(-r * out.tau) * intrinsic;
    return out;
}

void check_grid_match(const PathSet& paths, const std::vector<double>& times) {
    if (times.size() != paths.n_steps + 1) {
        throw std::invalid_argument("exercise rule: boundary grid does not match path grid");
    }
    if (std::fabs(times.back() - paths.maturity()) > 1e-9) {
        throw std::invalid_argument("exercise rule: boundary horizon does not match path horizon");
    }
}

}  // namespace

PayoffSampleSet apply_rule_1d(const PathSet& paths, const ExerciseBoundary1D& boundary,
                              double strike, double r) {
    check_grid_match(paths, boundary.times);
    PayoffSampleSet out;
    out.rule = "boundary_1d";
    out.first_path = paths.first_path;
    out.samples.resize(paths.n_paths);
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        PayoffSample smp = terminal_sample(paths, p, strike, r);
        for (std::size_t j = 0; j <= paths.n_steps; ++j) {
            const double s = paths.s(p, j);
            if (s <= boundary.values[j]) {
                smp.stop_step = static_cast<std::int64_t>(j);
                smp.tau = paths.dt * static_cast<double>(j);
                smp.payoff = std::exp(-r * smp.tau) * std::max(strike - s, 0.0);
                break;
            }
        }
        out.samples[p] = smp;
    }
    return out;
}

PayoffSampleSet apply_rule_2d(const PathSet& paths, const ExerciseBoundary2D& boundary,
                              double strike, double r) {
    check_grid_match(paths, boundary.times());
    PayoffSampleSet out;
    out.rule = "boundary_2d";
    out.first_path = paths.first_path;
    out.samples.resize(paths.n_paths);
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        PayoffSample smp = terminal_sample(paths, p, strike, r);
        for (std::size_t j = 0; j <= paths.n_steps; ++j) {
            const double t = paths.dt * static_cast<double>(j);
            const double s = paths.s(p, j);
            if (s <= boundary.eval(t, paths.v(p, j))) {
                smp.stop_step = static_cast<std::int64_t>(j);
                smp.tau = t;
                smp.payoff = std::exp(-r * smp.tau) * std::max(strike - s, 0.0);
                break;
            }
        }
        out.samples[p] = smp;
    }
    return out;
}

BoundaryCache::BoundaryCache(Solver1DConfig cfg, double strike, double maturity, double r,
                             double sigma_quantum)
    : cfg_(cfg), strike_(strike), maturity_(maturity), r_(r), quantum_(sigma_quantum) {
    cfg_.validate();
    if (!(quantum_ > 0.0)) throw std::invalid_argument("boundary cache: bad quantum");
}

double BoundaryCache::quantize(double sigma) const {
    const double q = std::round(sigma / quantum_) * quantum_;
    return std::clamp(q, kSigmaMin, kSigmaMax);
}

const std::vector<double>& BoundaryCache::boundary_for(double sigma) {
    const double q = quantize(sigma);
    const long long key = std::llround(q / quantum_);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    American1DResult res =
        price_american_put_1d(LocalVolFn::constant(q), cfg_, strike_, maturity_, r_);
    return memo_.emplace(key, std::move(res.boundary.values)).first->second;
}

std::size_t BoundaryCache::size() const { return memo_.size(); }

std::vector<std::size_t> recalibration_steps(double frequency, double maturity,
                                             std::size_t n_steps) {
    if (!(frequency > 0.0)) throw std::invalid_argument("recalibration: bad frequency");
    std::vector<std::size_t> steps;
    const double dt = maturity / static_cast<double>(n_steps);
    for (std::size_t k = 0;; ++k) {
        const double t = frequency * static_cast<double>(k);
        if (t > maturity - 0.5 * frequency) break;
        const std::size_t j = static_cast<std::size_t>(std::llround(t / dt));
        if (j >= n_steps) break;
        if (steps.empty() || steps.back() != j) steps.push_back(j);
    }
    return steps;
}

PayoffSampleSet apply_rule_recalibrated(const PathSet& paths, const HestonParams& p,
                                        double strike, double r,
                                        const RecalibratedRuleConfig& cfg,
                                        BoundaryCache& cache, RecalibrationTrace* trace) {
    if (cfg.recal_steps.empty()) {
        throw std::invalid_argument("recalibrated rule: need at least one calibration date");
    }
    for (std::size_t jstep : cfg.recal_steps) {
        if (jstep > paths.n_steps) {
            throw std::invalid_argument("recalibrated rule: date off the path grid");
        }
    }
    const double maturity = paths.maturity();

    std::vector<int> is_recal(paths.n_steps + 1, -1);
    for (std::size_t k = 0; k < cfg.recal_steps.size(); ++k) {
        is_recal[cfg.recal_steps[k]] = static_cast<int>(k);
    }
    if (trace) {
        trace->steps = cfg.recal_steps;
        trace->implied_vols.assign(cfg.recal_steps.size(), {});
        trace->spot_vols.assign(cfg.recal_steps.size(), {});
    }

    PayoffSampleSet out;
    out.rule = "bs_recalibrated";
    out.first_path = paths.first_path;
    out.samples.resize(paths.n_paths);
    for (std::size_t pth = 0; pth < paths.n_paths; ++pth) {
        PayoffSample smp = terminal_sample(paths, pth, strike, r);
        double sigma = -1.0;
        const std::vector<double>* bvals = nullptr;
        for (std::size_t j = 0; j <= paths.n_steps; ++j) {
            const double t = paths.dt * static_cast<double>(j);
            const double s = paths.s(pth, j);
            const int date_idx = is_recal[j];
            if (date_idx >= 0) {
                try {
                    sigma = recalibrate_bs_on_path(t, s, paths.v(pth, j), p, strike, maturity);
                } catch (const std::exception&) {
                    if (sigma < 0.0) throw;  // no previous calibration to fall back on
                }
                bvals = &cache.boundary_for(sigma);
                if (trace) {
                    trace->implied_vols[static_cast<std::size_t>(date_idx)].push_back(sigma);
                    trace->spot_vols[static_cast<std::size_t>(date_idx)].push_back(
                        std::sqrt(paths.v(pth, j)));
                }
            }
            if (bvals && s <= (*bvals)[j]) {
                smp.stop_step = static_cast<std::int64_t>(j);
                smp.tau = t;
                smp.payoff = std::exp(-r * smp.tau) * std::max(strike - s, 0.0);
                break;
            }
        }
        out.samples[pth] = smp;
    }
    return out;
}

void write_payoffs_csv(const PayoffSampleSet& set, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "path_id,stop_step,tau,payoff\n" << std::setprecision(12);
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        const PayoffSample& s = set.samples[i];
        f << (set.first_path + i) << ',' << s.stop_step << ',' << s.tau << ',' << s.payoff
          << '\n';
    }
}

void write_pathset(const PathSet& paths, const HestonParams& p, const std::string& bin_path,
                   const std::string& sidecar_path) {
    {
        std::ofstream f(bin_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + bin_path);
        f.write(reinterpret_cast<const char*>(paths.spot.data()),
                static_cast<std::streamsize>(paths.spot.size() * sizeof(double)));
        f.write(reinterpret_cast<const char*>(paths.var.data()),
                static_cast<std::streamsize>(paths.var.size() * sizeof(double)));
    }
    nlohmann::json j;
    j["n_paths"] = paths.n_paths;
    j["n_steps"] = paths.n_steps;
    j["dt"] = paths.dt;
    j["seed"] = paths.seed;
    j["first_path"] = paths.first_path;
    j["generator"] = paths.generator;
    j["layout"] = "spot then variance, row-major float64";
    j["params"] = {{"kappa", p.kappa},     {"theta", p.theta}, {"sigma_v", p.sigma_v},
                   {"rho", p.rho},         {"r", p.r},         {"s0", p.s0},
                   {"v0", p.v0}};
    std::ofstream f(sidecar_path);
    if (!f) throw std::runtime_error("cannot open " + sidecar_path);
    f << j.dump(2) << '\n';
}

PathSet read_pathset(const std::string& bin_path, const std::string& sidecar_path,
                     HestonParams* params_out) {
    nlohmann::json j;
    {
        std::ifstream f(sidecar_path);
        if (!f) throw std::runtime_error("cannot open " + sidecar_path);
        f >> j;
    }
    PathSet out;
    out.n_paths = j.at("n_paths").get<std::size_t>();
    out.n_steps = j.at("n_steps").get<std::size_t>();
    out.dt = j.at("dt").get<double>();
    out.seed = j.at("seed").get<std::uint64_t>();
    out.first_path = j.value("first_path", std::size_t{0});
    out.generator = j.value("generator", std::string{});
    if (params_out) {
        const auto& q = j.at("params");
        *params_out = HestonParams{q.at("kappa"), q.at("theta"), q.at("sigma_v"), q.at("rho"),
                                   q.at("r"),     q.at("s0"),    q.at("v0")};
    }
    const std::size_t n = out.n_paths * (out.n_steps + 1);
    out.spot.resize(n);
    out.var.resize(n);
    std::ifstream f(bin_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + bin_path);
    f.read(reinterpret_cast<char*>(out.spot.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
    f.read(reinterpret_cast<char*>(out.var.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw std::runtime_error("truncated path file " + bin_path);
    return out;
}

}  // namespace amrisk
