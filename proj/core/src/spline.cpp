#include "amrisk/spline.hpp"

#include <algorithm>
#include <stdexcept>

#include "amrisk/linalg.hpp"

namespace amrisk {

CubicSpline::CubicSpline(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n) {
        throw std::invalid_argument("cubic spline: need >= 2 knots and matching values");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(xs_[i] > xs_[i - 1])) {
            throw std::invalid_argument("cubic spline: knots must be strictly increasing");
        }
    }

    m_.assign(n, 0.0);
    if (n == 2) return;

    // Interior second derivatives from the standard tridiagonal system.
    const std::size_t k = n - 2;
    TridiagonalMatrix sys{std::vector<double>(k - 1), std::vector<double>(k),
                          std::vector<double>(k - 1)};
    std::vector<double> rhs(k);
    for (std::size_t i = 1; i <= k; ++i) {
        const double hl = xs_[i] - xs_[i - 1];
        const double hr = xs_[i + 1] - xs_[i];
        sys.diag[i - 1] = 2.0 * (hl + hr);
        if (i > 1) sys.lower[i - 2] = hl;
        if (i < k) sys.upper[i - 1] = hr;
        rhs[i - 1] = 6.0 * ((ys_[i + 1] - ys_[i]) / hr - (ys_[i] - ys_[i - 1]) / hl);
    }
    const std::vector<double> sol = solve_tridiagonal(sys, rhs);
    for (std::size_t i = 1; i <= k; ++i) m_[i] = sol[i - 1];
}

std::size_t CubicSpline::interval(double x) const {
    if (x <= xs_.front()) return 0;
    if (x >= xs_.back()) return xs_.size() - 2;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    return static_cast<std::size_t>(it - xs_.begin()) - 1;
}

double CubicSpline::operator()(double x) const {
    if (x < xs_.front()) {
        return ys_.front() + derivative(xs_.front()) * (x - xs_.front());
    }
    if (x > xs_.back()) {
        return ys_.back() + derivative(xs_.back()) * (x - xs_.back());
    }
    const std::size_t i = interval(x);
    const double h = xs_[i + 1] - xs_[i];
    const double a = (xs_[i + 1] - x) / h;
    const double b = (x - xs_[i]) / h;
    return a * ys_[i] + b * ys_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double x) const {
    const double lo = xs_.front();
    const double hi = xs_.back();
    const double xc = std::clamp(x, lo, hi);
    const std::size_t i = interval(xc);
    const double h = xs_[i + 1] - xs_[i];
    const double a = (xs_[i + 1] - xc) / h;
    const double b = (xc - xs_[i]) / h;
    return (ys_[i + 1] - ys_[i]) / h +
           (-(3.0 * a * a - 1.0) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

double CubicSpline::second_derivative(double x) const {
    if (x < xs_.front() || x > xs_.back()) return 0.0;
    const std::size_t i = interval(x);
    const double h = xs_[i + 1] - xs_[i];
    const double a = (xs_[i + 1] - x) / h;
    const double b = (x - xs_[i]) / h;
    return a * m_[i] + b * m_[i + 1];
}

SplineSurface::SplineSurface(std::vector<double> strikes, std::vector<double> maturities,
                             std::vector<double> grid)
    : strikes_(std::move(strikes)), maturities_(std::move(maturities)) {
    const std::size_t nk = strikes_.size();
    const std::size_t nt = maturities_.size();
    if (grid.size() != nk * nt) {
        throw std::invalid_argument("spline surface: grid size must be strikes x maturities");
    }
    per_maturity_.reserve(nt);
    for (std::size_t m = 0; m < nt; ++m) {
        std::vector<double> col(nk);
        for (std::size_t i = 0; i < nk; ++i) col[i] = grid[i * nt + m];
        per_maturity_.emplace_back(strikes_, std::move(col));
    }
}

CubicSpline SplineSurface::maturity_section(double strike) const {
    std::vector<double> vals(maturities_.size());
    for (std::size_t m = 0; m < per_maturity_.size(); ++m) {
        vals[m] = per_maturity_[m](strike);
    }
    return CubicSpline(maturities_, std::move(vals));
}

double SplineSurface::operator()(double strike, double maturity) const {
    if (maturities_.size() == 1) return per_maturity_[0](strike);
    return maturity_section(strike)(maturity);
}

double SplineSurface::d_strike(double strike, double maturity) const {
    std::vector<double> vals(maturities_.size());
    for (std::size_t m = 0; m < per_maturity_.size(); ++m) {
        vals[m] = per_maturity_[m].derivative(strike);
    }
    if (maturities_.size() == 1) return vals[0];
    return CubicSpline(maturities_, std::move(vals))(maturity);
}

double SplineSurface::d2_strike(double strike, double maturity) const {
    std::vector<double> vals(maturities_.size());
    for (std::size_t m = 0; m < per_maturity_.size(); ++m) {
        vals[m] = per_maturity_[m].second_derivative(strike);
    }
    if (maturities_.size() == 1) return vals[0];
    return CubicSpline(maturities_, std::move(vals))(maturity);
}

double SplineSurface::d_maturity(double strike, double maturity) const {
    if (maturities_.size() == 1) return 0.0;
    return maturity_section(strike).derivative(maturity);
}

}  // namespace amrisk
