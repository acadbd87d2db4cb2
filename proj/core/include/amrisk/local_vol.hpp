#pragma once

#include <memory>
#include <string>
#include <vector>

#include "amrisk/grid.hpp"

namespace amrisk {

inline constexpr double kSigmaMin = 0.01;
inline constexpr double kSigmaMax = 6.0;

/// Nodes where the calibration optimizes directly: times above the
/// first observed maturity, log-prices in [x_min, x_max]. Elsewhere the
/// surface is spline-extrapolated.
struct RegionMask {
    double t_min = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;

    bool contains(double t, double x) const { return t > t_min && x >= x_min && x <= x_max; }
};

/// Deterministic local variance sigma(t, S)^2 tabulated on a time x
/// log-price grid. Values are clamped to [kSigmaMin^2, kSigmaMax^2] at
/// construction; queries outside the grid box use the nearest edge.
class LocalVolSurface {
public:
    LocalVolSurface(Grid1D t_grid, Grid1D x_grid, std::vector<double> variance);

    void set_region(RegionMask region) { region_ = region; }
    const RegionMask& region() const { return region_; }

    const Grid1D& time_grid() const { return t_; }
    const Grid1D& x_grid() const { return x_; }

    double variance_at_node(std::size_t j, std::size_t i) const {
        return var_[j * x_.size() + i];
    }
    double sigma_at_node(std::size_t j, std::size_t i) const;

    /// Bilinear interpolation in (t, log S).
    double sigma(double t, double spot) const;
    double variance(double t, double x_logprice) const;

private:
    Grid1D t_, x_;
    std::vector<double> var_;
    RegionMask region_;
};

/// Level-dependent volatility evaluator: a constant (Black-Scholes) or
/// a calibrated surface (Dupire). All values lie in [kSigmaMin, kSigmaMax].
class LocalVolFn {
public:
    static LocalVolFn constant(double sigma);
    static LocalVolFn from_surface(std::shared_ptr<const LocalVolSurface> surface);

    double sigma(double t, double spot) const {
        return surface_ ? surface_->sigma(t, spot) : const_sigma_;
    }
    bool is_constant() const { return surface_ == nullptr; }
    double constant_sigma() const { return const_sigma_; }

private:
    LocalVolFn() = default;
    double const_sigma_ = 0.0;
    std::shared_ptr<const LocalVolSurface> surface_;
};

void write_local_vol_csv(const LocalVolSurface& surface, const std::string& path,
                         std::size_t t_stride = 1, std::size_t x_stride = 1);

}  // namespace amrisk
