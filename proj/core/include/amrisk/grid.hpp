#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace amrisk {

/// One-dimensional spatial or temporal mesh with precomputed spacings.
/// Nodes are strictly increasing; spacing(i) = x_i - x_{i-1} for i in [1, size()-1].
class Grid1D {
public:
    Grid1D() = default;  // empty; assign before use
    explicit Grid1D(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    std::size_t max_index() const { return nodes_.size() - 1; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// x_i - x_{i-1}, valid for i in [1, max_index()].
    double spacing(std::size_t i) const { return dx_[i - 1]; }

    double front() const { return nodes_.front(); }
    double back() const { return nodes_.back(); }

    /// Largest index k with nodes[k] <= x, clamped to [0, max_index()].
    std::size_t locate(double x) const;

private:
    std::vector<double> nodes_;
    std::vector<double> dx_;
};

/// Stock grid clustered around the strike: s_i = K + c*sinh(xi_i) with
/// equidistant xi spanning [asinh(-K/c), asinh((s_max-K)/c)].
/// Endpoints are s_0 = 0 and s_{m1} = s_max.
Grid1D build_sinh_stock_grid(double strike, double s_max, double c, std::size_t m1);

/// Variance grid clustered near zero: v_j = d*sinh(j*dzeta), v_0 = 0,
/// v_{m2} = v_max. Requires v_max > 1.
Grid1D build_sinh_variance_grid(double v_max, double d, std::size_t m2);

/// n+1 equidistant nodes on [lo, hi].
Grid1D build_uniform_grid(double lo, double hi, std::size_t n);

enum class StencilScheme { Downward, Central, Upward };

/// Non-uniform finite-difference weights over three consecutive nodes.
/// offsets[k] is the node index displacement, weights[k] the coefficient.
struct StencilCoeffs {
    std::array<int, 3> offsets;
    std::array<double, 3> weights;
};

/// Tensor-product stencil for a mixed second derivative. weights[a][b]
/// multiplies f(x_{i+s_offsets[a]}, y_{j+v_offsets[b]}).
struct MixedStencil {
    std::array<int, 3> s_offsets;
    std::array<int, 3> v_offsets;
    std::array<std::array<double, 3>, 3> weights;
};

/// First-derivative weights at node i. Downward uses nodes {i-2,i-1,i}
/// (needs i >= 2), central {i-1,i,i+1}, upward {i,i+1,i+2} (needs
/// i <= m-2). Out-of-range index requests throw; callers pick fallbacks.
StencilCoeffs fd_first_coeffs(const Grid1D& grid, std::size_t i, StencilScheme scheme);

/// Second-derivative weights, same stencil footprints as fd_first_coeffs.
StencilCoeffs fd_second_coeffs(const Grid1D& grid, std::size_t i, StencilScheme scheme);

/// Mixed-derivative weights: central in the first direction, central or
/// upward in the second, formed as the outer product of 1D stencils.
MixedStencil fd_mixed_coeffs(const Grid1D& grid_s, const Grid1D& grid_v,
                             std::size_t i, std::size_t j, StencilScheme scheme_v);

}  // namespace amrisk
