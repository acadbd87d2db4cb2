#include "amrisk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amrisk {

Grid1D::Grid1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) {
        throw std::invalid_argument("Grid1D: need at least two nodes");
    }
    dx_.resize(nodes_.size() - 1);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        dx_[i - 1] = nodes_[i] - nodes_[i - 1];
        if (!(dx_[i - 1] > 0.0)) {
            throw std::invalid_argument("Grid1D: nodes must be strictly increasing");
        }
    }
}

std::size_t Grid1D::locate(double x) const {
    if (x <= nodes_.front()) return 0;
    if (x >= nodes_.back()) return max_index();
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

Grid1D build_sinh_stock_grid(double strike, double s_max, double c, std::size_t m1) {
    if (!(strike > 0.0)) throw std::invalid_argument("sinh stock grid: strike must be positive");
    if (!(s_max > strike)) throw std::invalid_argument("sinh stock grid: s_max must exceed strike");
    if (!(c > 0.0)) throw std::invalid_argument("sinh stock grid: stretch c must be positive");
    if (m1 < 2) throw std::invalid_argument("sinh stock grid: m1 must be >= 2");

    const double xi0 = std::asinh(-strike / c);
    const double xim = std::asinh((s_max - strike) / c);
    const double dxi = (xim - xi0) / static_cast<double>(m1);

    std::vector<double> s(m1 + 1);
    for (std::size_t i = 0; i <= m1; ++i) {
        s[i] = strike + c * std::sinh(xi0 + static_cast<double>(i) * dxi);
    }
    s.front() = 0.0;
    s.back() = s_max;
    return Grid1D(std::move(s));
}

Grid1D build_sinh_variance_grid(double v_max, double d, std::size_t m2) {
    if (!(v_max > 1.0)) throw std::invalid_argument("sinh variance grid: v_max must exceed 1");
    if (!(d > 0.0)) throw std::invalid_argument("sinh variance grid: stretch d must be positive");
    if (m2 < 2) throw std::invalid_argument("sinh variance grid: m2 must be >= 2");

    const double dzeta = std::asinh(v_max / d) / static_cast<double>(m2);
    std::vector<double> v(m2 + 1);
    for (std::size_t j = 0; j <= m2; ++j) {
        v[j] = d * std::sinh(static_cast<double>(j) * dzeta);
    }
    v.front() = 0.0;
    v.back() = v_max;
    return Grid1D(std::move(v));
}

Grid1D build_uniform_grid(double lo, double hi, std::size_t n) {
    if (!(lo < hi)) throw std::invalid_argument("uniform grid: lo must be below hi");
    if (n < 1) throw std::invalid_argument("uniform grid: need at least one interval");

    std::vector<double> x(n + 1);
    const double h = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
        x[i] = lo + static_cast<double>(i) * h;
    }
    x.back() = hi;
    return Grid1D(std::move(x));
}

namespace {

void require_range(bool ok, const char* what) {
    if (!ok) throw std::out_of_range(what);
}

}  // namespace

StencilCoeffs fd_first_coeffs(const Grid1D& grid, std::size_t i, StencilScheme scheme) {
    const std::size_t m = grid.max_index();
    switch (scheme) {
        case StencilScheme::Downward: {
            require_range(i >= 2 && i <= m, "downward first-derivative stencil needs i >= 2");
            const double dm = grid.spacing(i - 1);  // x_{i-1} - x_{i-2}
            const double d0 = grid.spacing(i);      // x_i - x_{i-1}
            return {{-2, -1, 0},
                    {d0 / (dm * (dm + d0)),
                     (-dm - d0) / (dm * d0),
                     (dm + 2.0 * d0) / (d0 * (dm + d0))}};
        }
        case StencilScheme::Central: {
            require_range(i >= 1 && i + 1 <= m, "central first-derivative stencil needs interior i");
            const double d0 = grid.spacing(i);
            const double dp = grid.spacing(i + 1);
            return {{-1, 0, 1},
                    {-dp / (d0 * (d0 + dp)),
                     (dp - d0) / (d0 * dp),
                     d0 / (dp * (d0 + dp))}};
        }
        case StencilScheme::Upward: {
            require_range(i + 2 <= m, "upward first-derivative stencil needs i <= m-2");
            const double dp = grid.spacing(i + 1);
            const double dpp = grid.spacing(i + 2);
            return {{0, 1, 2},
                    {(-2.0 * dp - dpp) / (dp * (dp + dpp)),
                     (dp + dpp) / (dp * dpp),
                     -dp / (dpp * (dp + dpp))}};
        }
    }
    throw std::logic_error("fd_first_coeffs: unreachable");
}

StencilCoeffs fd_second_coeffs(const Grid1D& grid, std::size_t i, StencilScheme scheme) {
    const std::size_t m = grid.max_index();
    switch (scheme) {
        case StencilScheme::Downward: {
            require_range(i >= 2 && i <= m, "downward second-derivative stencil needs i >= 2");
            const double dm = grid.spacing(i - 1);
            const double d0 = grid.spacing(i);
            return {{-2, -1, 0},
                    {2.0 / (dm * (dm + d0)),
                     -2.0 / (dm * d0),
                     2.0 / (d0 * (dm + d0))}};
        }
        case StencilScheme::Central: {
            require_range(i >= 1 && i + 1 <= m, "central second-derivative stencil needs interior i");
            const double d0 = grid.spacing(i);
            const double dp = grid.spacing(i + 1);
            return {{-1, 0, 1},
                    {2.0 / (d0 * (d0 + dp)),
                     -2.0 / (d0 * dp),
                     2.0 / (dp * (d0 + dp))}};
        }
        case StencilScheme::Upward: {
            require_range(i + 2 <= m, "upward second-derivative stencil needs i <= m-2");
            const double dp = grid.spacing(i + 1);
            const double dpp = grid.spacing(i + 2);
            return {{0, 1, 2},
                    {2.0 / (dp * (dp + dpp)),
                     -2.0 / (dp * dpp),
                     2.0 / (dpp * (dp + dpp))}};
        }
    }
    throw std::logic_error("fd_second_coeffs: unreachable");
}

MixedStencil fd_mixed_coeffs(const Grid1D& grid_s, const Grid1D& grid_v,
                             std::size_t i, std::size_t j, StencilScheme scheme_v) {
    if (scheme_v != StencilScheme::Central && scheme_v != StencilScheme::Upward) {
        throw std::invalid_argument("fd_mixed_coeffs: v-scheme must be central or upward");
    }
    const StencilCoeffs cs = fd_first_coeffs(grid_s, i, StencilScheme::Central);
    const StencilCoeffs cv = fd_first_coeffs(grid_v, j, scheme_v);

    MixedStencil out;
    out.s_offsets = cs.offsets;
    out.v_offsets = cv.offsets;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            out.weights[a][b] = cs.weights[a] * cv.weights[b];
        }
    }
    return out;
}

}  // namespace amrisk
