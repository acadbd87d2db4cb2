#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "amrisk/grid.hpp"
#include "amrisk/local_vol.hpp"

namespace amrisk {

/// Configuration of the one-dimensional log-price solver. Defaults are
/// the study's grid: 300 time steps, 1001 space steps over
/// [0.2272941, log 80], lambda1 = 0.5 (semi-implicit).
struct Solver1DConfig {
    std::size_t n1 = 300;
    std::size_t n2 = 1001;
    double x0 = 0.2272941;
    double x_max = std::log(80.0);
    double lambda1 = 0.5;

    void validate() const;
    Grid1D x_grid() const { return build_uniform_grid(x0, x_max, n2); }
    Grid1D time_grid(double maturity) const { return build_uniform_grid(0.0, maturity, n1); }
};

/// Early-exercise threshold in price units per time node, with
/// left-continuous piecewise-constant lookup between nodes.
struct ExerciseBoundary1D {
    std::vector<double> times;
    std::vector<double> values;

    double at_time(double t) const;
};

/// Backward-induction value grid, time-major rows over the full x grid.
struct Solution1D {
    Grid1D x;
    std::vector<double> times;
    std::vector<double> values;  // (times.size()) x (x.size())

    double at(std::size_t j, std::size_t i) const { return values[j * x.size() + i]; }
    /// Linear interpolation in log-price at time node j.
    double at_spot(std::size_t j, double spot) const;
};

struct American1DResult {
    Solution1D solution;
    ExerciseBoundary1D boundary;
};

/// Brennan-Schwartz American put: semi-implicit stepping of the
/// tridiagonal system with elementwise projection onto the payoff after
/// each solve, boundary conditions U(t, x0) = K - exp(x0), U(t, xmax) = 0.
American1DResult price_american_put_1d(const LocalVolFn& vol, const Solver1DConfig& cfg,
                                       double strike, double maturity, double r);

/// Same stepping without projection; call boundary conditions
/// U(t, x0) = 0, U(t, xmax) = exp(xmax) - K exp(-r (T - t)).
Solution1D price_european_call_1d(const LocalVolFn& vol, const Solver1DConfig& cfg,
                                  double strike, double maturity, double r);

/// Per time step, the largest grid price whose value has collapsed to a
/// positive intrinsic payoff (tolerance 1e-9 * K); zero when no interior
/// node exercises.
ExerciseBoundary1D extract_boundary_1d(const Solution1D& solution,
                                       const std::vector<double>& payoff, double strike);

void write_boundary_csv(const ExerciseBoundary1D& boundary, const std::string& path);

}  // namespace amrisk
