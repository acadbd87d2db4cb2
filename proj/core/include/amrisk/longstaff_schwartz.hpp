#pragma once

#include <cstdint>
#include <vector>

#include "amrisk/heston.hpp"
#include "amrisk/local_vol.hpp"
#include "amrisk/pde1d.hpp"
#include "amrisk/pde2d.hpp"

namespace amrisk {

/// Randomized-start regression estimator of the exercise boundary:
/// S(0) ~ N(start_mean, start_sd^2) truncated at zero, backward
/// regression of discounted continuation values on the basis set over
/// in-the-money paths (configurable), boundary per step from the root of
/// intrinsic minus fitted continuation.
struct LSConfig {
    std::size_t n_paths = 200000;
    std::size_t n_steps = 300;
    std::uint64_t seed = 90217;
    bool itm_only = true;
    double start_mean = 10.0;
    double start_sd = 2.5;
};

/// One-dimensional models; basis {S, S^2, ..., S^8} in strike units.
ExerciseBoundary1D ls_boundary_1d(const LocalVolFn& vol, double r, double strike,
                                  double maturity, const LSConfig& cfg);

/// Heston model; basis {S, S^2, S^3, v, Sv, S^2 v} in strike units. The
/// boundary is estimated at the supplied variance knots.
ExerciseBoundary2D ls_boundary_heston(const HestonParams& p, double strike, double maturity,
                                      const LSConfig& cfg, const std::vector<double>& v_knots);

}  // namespace amrisk
