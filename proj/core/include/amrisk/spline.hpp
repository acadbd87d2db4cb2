#pragma once

#include <cstddef>
#include <vector>

namespace amrisk {

/// Natural cubic spline: zero second derivative at both end knots,
/// linear extrapolation with the end slope outside the knot range.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    const std::vector<double>& knots() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }
    /// Second-derivative coefficients at the knots (zero at both ends).
    const std::vector<double>& curvature() const { return m_; }

private:
    std::size_t interval(double x) const;

    std::vector<double> xs_, ys_, m_;
};

/// Two-step bicubic surface over a strike x maturity lattice: a natural
/// spline in the strike direction per maturity, then a natural spline
/// through the per-maturity evaluations in the maturity direction.
class SplineSurface {
public:
    SplineSurface() = default;
    /// values(i, m) = grid[i * maturities.size() + m], strikes major.
    SplineSurface(std::vector<double> strikes, std::vector<double> maturities,
                  std::vector<double> grid);

    double operator()(double strike, double maturity) const;
    /// Partial derivatives assembled the same two-step way.
    double d_strike(double strike, double maturity) const;
    double d2_strike(double strike, double maturity) const;
    double d_maturity(double strike, double maturity) const;

    const std::vector<double>& strikes() const { return strikes_; }
    const std::vector<double>& maturities() const { return maturities_; }

private:
    CubicSpline maturity_section(double strike) const;

    std::vector<double> strikes_, maturities_;
    std::vector<CubicSpline> per_maturity_;  // strike-direction splines
};

}  // namespace amrisk
