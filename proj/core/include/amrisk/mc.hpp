#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "amrisk/heston.hpp"
#include "amrisk/pde1d.hpp"
#include "amrisk/pde2d.hpp"

namespace amrisk {

/// Simulated Heston trajectories. Path p of a block owns the RNG
/// substream keyed by (seed, first_path + p), so a set of paths is
/// reproducible from (seed, n_paths, n_steps, params) regardless of the
/// block decomposition or thread count.
struct PathSet {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::size_t first_path = 0;
    std::string generator = "milstein-fulltrunc/xoshiro256++";
    std::vector<double> spot;  // n_paths x (n_steps + 1)
    std::vector<double> var;

    double s(std::size_t p, std::size_t j) const { return spot[p * (n_steps + 1) + j]; }
    double v(std::size_t p, std::size_t j) const { return var[p * (n_steps + 1) + j]; }
    double maturity() const { return dt * static_cast<double>(n_steps); }
};

/// Milstein scheme with the sigma_v^2/4 (dW^2 - dt) variance correction
/// and full truncation: the positive part enters drifts and square
/// roots, and the variance is clamped at zero after each update.
PathSet simulate_heston(const HestonParams& p, double maturity, std::size_t n_paths,
                        std::size_t n_steps, std::uint64_t seed, std::size_t first_path = 0,
                        unsigned n_threads = 1);

struct PayoffSample {
    std::int64_t stop_step = -1;  // -1: rule never triggered
    double tau = 0.0;
    double payoff = 0.0;
};

struct PayoffSampleSet {
    std::string rule;
    std::size_t first_path = 0;
    std::vector<PayoffSample> samples;

    std::vector<double> payoffs() const;
    /// Stopping times; when exercised_only, untriggered paths with zero
    /// intrinsic are skipped.
    std::vector<double> stopping_times(bool exercised_only) const;
    double exercised_fraction() const;

    void append(const PayoffSampleSet& other);
};

/// First grid time with S(t) <= B(t); exercise is monitored on the
/// shared simulation grid. An untriggered path collects the discounted
/// terminal intrinsic (possibly zero).
PayoffSampleSet apply_rule_1d(const PathSet& paths, const ExerciseBoundary1D& boundary,
                              double strike, double r);

/// Same with the state-dependent threshold B(t, v(t)).
PayoffSampleSet apply_rule_2d(const PathSet& paths, const ExerciseBoundary2D& boundary,
                              double strike, double r);

/// Shared memo of 1D exercise boundaries keyed by the implied volatility
/// quantized to sigma_quantum; contents are a pure function of the keys.
class BoundaryCache {
public:
    BoundaryCache(Solver1DConfig cfg, double strike, double maturity, double r,
                  double sigma_quantum = 1e-3);

    double quantize(double sigma) const;
    /// Boundary values on the solver time grid for the quantized sigma.
    const std::vector<double>& boundary_for(double sigma);

    std::size_t size() const;

private:
    Solver1DConfig cfg_;
    double strike_, maturity_, r_, quantum_;
    std::mutex mutex_;
    std::map<long long, std::vector<double>> memo_;
};

struct RecalibratedRuleConfig {
    std::vector<std::size_t> recal_steps;  // subset of path grid indices
    double sigma_quantum = 1e-3;
};

struct RecalibrationTrace {
    std::vector<std::size_t> steps;
    // per recalibration date: implied vols and instantaneous vols across paths
    std::vector<std::vector<double>> implied_vols;
    std::vector<std::vector<double>> spot_vols;
};

/// Black-Scholes rule refreshed on a calendar of recalibration dates:
/// at each date the implied vol of the Heston European put at the path
/// state replaces sigma (keeping the previous value when the inversion
/// has no solution), and the boundary for the new sigma applies until
/// the next date.
PayoffSampleSet apply_rule_recalibrated(const PathSet& paths, const HestonParams& p,
                                        double strike, double r,
                                        const RecalibratedRuleConfig& cfg,
                                        BoundaryCache& cache,
                                        RecalibrationTrace* trace = nullptr);

/// Recalibration dates: multiples of `frequency` years in
/// [0, maturity - frequency/2], snapped to the nearest grid step.
std::vector<std::size_t> recalibration_steps(double frequency, double maturity,
                                             std::size_t n_steps);

void write_payoffs_csv(const PayoffSampleSet& set, const std::string& path);

/// Flat binary layout (spot matrix then variance matrix, row-major
/// doubles) with a JSON sidecar describing parameters, seed and shape.
void write_pathset(const PathSet& paths, const HestonParams& p, const std::string& bin_path,
                   const std::string& sidecar_path);
PathSet read_pathset(const std::string& bin_path, const std::string& sidecar_path,
                     HestonParams* params_out = nullptr);

}  // namespace amrisk
