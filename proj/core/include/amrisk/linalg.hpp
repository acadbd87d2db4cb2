#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace amrisk {

/// Raised when a linear solve or quadrature cannot be completed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tridiagonal matrix stored as bands: lower (n-1), diag (n), upper (n-1).
struct TridiagonalMatrix {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    std::size_t size() const { return diag.size(); }
    void validate() const;

    std::vector<double> multiply(const std::vector<double>& x) const;
    TridiagonalMatrix transposed() const { return {upper, diag, lower}; }
};

/// Thomas elimination without pivoting. Throws NumericalError on a pivot
/// smaller than 1e-14 times the largest band magnitude.
std::vector<double> solve_tridiagonal(const TridiagonalMatrix& m, const std::vector<double>& rhs);

/// In-place variant writing into x; scratch must have size n.
void solve_tridiagonal(const TridiagonalMatrix& m, const double* rhs, double* x,
                       double* scratch);

/// General banded matrix with kl sub- and ku super-diagonals, stored
/// column-wise per row: band(i, d) = A(i, i+d) for d in [-kl, ku].
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    std::size_t size() const { return n_; }
    double& at(std::size_t i, int d) { return a_[i * width_ + static_cast<std::size_t>(d + kl_)]; }
    double at(std::size_t i, int d) const { return a_[i * width_ + static_cast<std::size_t>(d + kl_)]; }

    std::vector<double> multiply(const std::vector<double>& x) const;

    /// LU factorization without pivoting; reusable across many solves.
    void factorize();
    void solve_factored(const double* rhs, double* x) const;
    std::vector<double> solve_factored(const std::vector<double>& rhs) const;

private:
    std::size_t n_, kl_, ku_, width_;
    std::vector<double> a_;
    bool factored_ = false;
};

}  // namespace amrisk
