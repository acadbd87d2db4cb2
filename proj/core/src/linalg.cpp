#include "amrisk/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace amrisk {

void TridiagonalMatrix::validate() const {
    const std::size_t n = diag.size();
    if (n == 0) throw std::invalid_argument("tridiagonal: empty matrix");
    if (lower.size() + 1 != n || upper.size() + 1 != n) {
        throw std::invalid_argument("tridiagonal: band lengths must be n-1, n, n-1");
    }
}

std::vector<double> TridiagonalMatrix::multiply(const std::vector<double>& x) const {
    validate();
    const std::size_t n = diag.size();
    if (x.size() != n) throw std::invalid_argument("tridiagonal multiply: size mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i - 1] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

namespace {

double max_band_magnitude(const TridiagonalMatrix& m) {
    double mx = 0.0;
    for (double v : m.diag) mx = std::max(mx, std::fabs(v));
    for (double v : m.lower) mx = std::max(mx, std::fabs(v));
    for (double v : m.upper) mx = std::max(mx, std::fabs(v));
    return mx;
}

}  // namespace

void solve_tridiagonal(const TridiagonalMatrix& m, const double* rhs, double* x,
                       double* scratch) {
    const std::size_t n = m.diag.size();
    const double tiny = 1e-14 * max_band_magnitude(m);

    double piv = m.diag[0];
    if (std::fabs(piv) <= tiny) throw NumericalError("tridiagonal solve: zero pivot at row 0");
    scratch[0] = (n > 1) ? m.upper[0] / piv : 0.0;
    x[0] = rhs[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = m.diag[i] - m.lower[i - 1] * scratch[i - 1];
        if (std::fabs(piv) <= tiny) throw NumericalError("tridiagonal solve: zero pivot");
        if (i + 1 < n) scratch[i] = m.upper[i] / piv;
        x[i] = (rhs[i] - m.lower[i - 1] * x[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= scratch[i] * x[i + 1];
    }
}

std::vector<double> solve_tridiagonal(const TridiagonalMatrix& m, const std::vector<double>& rhs) {
    m.validate();
    if (rhs.size() != m.diag.size()) {
        throw std::invalid_argument("tridiagonal solve: rhs size mismatch");
    }
    std::vector<double> x(rhs.size());
    std::vector<double> scratch(rhs.size());
    solve_tridiagonal(m, rhs.data(), x.data(), scratch.data());
    return x;
}

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), width_(kl + ku + 1), a_(n * width_, 0.0) {
    if (n == 0) throw std::invalid_argument("banded: empty matrix");
}

std::vector<double> BandedMatrix::multiply(const std::vector<double>& x) const {
    if (factored_) throw std::logic_error("banded multiply: matrix already factored");
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const int lo = -static_cast<int>(std::min<std::size_t>(kl_, i));
        const int hi = static_cast<int>(std::min<std::size_t>(ku_, n_ - 1 - i));
        double s = 0.0;
        for (int d = lo; d <= hi; ++d) s += at(i, d) * x[i + static_cast<std::size_t>(d)];
        y[i] = s;
    }
    return y;
}

void BandedMatrix::factorize() {
    double mx = 0.0;
    for (double v : a_) mx = std::max(mx, std::fabs(v));
    const double tiny = 1e-14 * mx;

    for (std::size_t k = 0; k < n_; ++k) {
        const double piv = at(k, 0);
        if (std::fabs(piv) <= tiny) throw NumericalError("banded factorize: zero pivot");
        const std::size_t imax = std::min(n_ - 1, k + kl_);
        for (std::size_t i = k + 1; i <= imax; ++i) {
            const int di = static_cast<int>(k) - static_cast<int>(i);
            const double l = at(i, di) / piv;
            at(i, di) = l;
            const std::size_t jmax = std::min(n_ - 1, k + ku_);
            for (std::size_t j = k + 1; j <= jmax; ++j) {
                at(i, static_cast<int>(j) - static_cast<int>(i)) -=
                    l * at(k, static_cast<int>(j) - static_cast<int>(k));
            }
        }
    }
    factored_ = true;
}

void BandedMatrix::solve_factored(const double* rhs, double* x) const {
    if (!factored_) throw std::logic_error("banded solve: factorize first");
    for (std::size_t i = 0; i < n_; ++i) {
        double s = rhs[i];
        const std::size_t j0 = (i >= kl_) ? i - kl_ : 0;
        for (std::size_t j = j0; j < i; ++j) {
            s -= at(i, static_cast<int>(j) - static_cast<int>(i)) * x[j];
        }
        x[i] = s;
    }
    for (std::size_t i = n_; i-- > 0;) {
        double s = x[i];
        const std::size_t jmax = std::min(n_ - 1, i + ku_);
        for (std::size_t j = i + 1; j <= jmax; ++j) {
            s -= at(i, static_cast<int>(j) - static_cast<int>(i)) * x[j];
        }
        x[i] = s / at(i, 0);
    }
}

std::vector<double> BandedMatrix::solve_factored(const std::vector<double>& rhs) const {
    if (rhs.size() != n_) throw std::invalid_argument("banded solve: rhs size mismatch");
    std::vector<double> x(n_);
    solve_factored(rhs.data(), x.data());
    return x;
}

}  // namespace amrisk
