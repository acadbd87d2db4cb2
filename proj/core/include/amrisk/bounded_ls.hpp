#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace amrisk {

/// Dense row-major matrix, the design operator for least squares.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::vector<double> apply(const std::vector<double>& x) const;
    std::vector<double> apply_transpose(const std::vector<double>& r) const;
};

struct BoundedLsOptions {
    double tol = 1e-8;        // projected-gradient infinity norm
    std::size_t max_iter = 10000;
};

struct BoundedLsResult {
    std::vector<double> x;
    double projected_gradient_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// min ||A x - b||^2 subject to lo <= x <= hi, via projected gradient
/// with Barzilai-Borwein steps. Deterministic. The returned point is
/// always feasible; convergence means the projected-gradient infinity
/// norm fell below tol.
BoundedLsResult solve_bound_constrained_ls(
    const std::function<std::vector<double>(const std::vector<double>&)>& apply,
    const std::function<std::vector<double>(const std::vector<double>&)>& apply_transpose,
    const std::vector<double>& target,
    const std::vector<double>& lo, const std::vector<double>& hi,
    const std::vector<double>& start, const BoundedLsOptions& opts = {});

BoundedLsResult solve_bound_constrained_ls(
    const DenseMatrix& design, const std::vector<double>& target,
    const std::vector<double>& lo, const std::vector<double>& hi,
    const std::vector<double>& start, const BoundedLsOptions& opts = {});

}  // namespace amrisk
