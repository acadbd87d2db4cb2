#include "amrisk/bounded_ls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amrisk {

std::vector<double> DenseMatrix::apply(const std::vector<double>& x) const {
    std::vector<double> y(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        const double* row = data.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

std::vector<double> DenseMatrix::apply_transpose(const std::vector<double>& r) const {
    std::vector<double> y(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = data.data() + i * cols;
        const double ri = r[i];
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * ri;
    }
    return y;
}

namespace {

void project(std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

// Stationarity measure for box constraints: the gradient component is
// ignored when it points out of the feasible set at an active bound.
double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g,
                               const std::vector<double>& lo, const std::vector<double>& hi) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double gi = g[i];
        if (x[i] <= lo[i]) gi = std::min(gi, 0.0);
        if (x[i] >= hi[i]) gi = std::max(gi, 0.0);
        nrm = std::max(nrm, std::fabs(gi));
    }
    return nrm;
}

}  // namespace

BoundedLsResult solve_bound_constrained_ls(
    const std::function<std::vector<double>(const std::vector<double>&)>& apply,
    const std::function<std::vector<double>(const std::vector<double>&)>& apply_transpose,
    const std::vector<double>& target,
    const std::vector<double>& lo, const std::vector<double>& hi,
    const std::vector<double>& start, const BoundedLsOptions& opts) {
    const std::size_t n = start.size();
    if (lo.size() != n || hi.size() != n) {
        throw std::invalid_argument("bounded ls: bound/start size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (lo[i] > hi[i]) throw std::invalid_argument("bounded ls: infeasible bounds (lo > hi)");
    }

    BoundedLsResult res;
    res.x = start;
    project(res.x, lo, hi);

    auto gradient = [&](const std::vector<double>& x) {
        std::vector<double> r = apply(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= target[i];
        std::vector<double> g = apply_transpose(r);
        for (double& gi : g) gi *= 2.0;
        return g;
    };

    std::vector<double> g = gradient(res.x);
    double step = 1.0;
    {
        // Initial step from the curvature along the gradient direction.
        std::vector<double> ag = apply(g);
        double num = 0.0, den = 0.0;
        for (double v : g) num += v * v;
        for (double v : ag) den += v * v;
        step = (den > 0.0) ? num / (2.0 * den) : 1.0;
    }

    std::vector<double> x_prev = res.x, g_prev = g;
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        res.projected_gradient_norm = projected_gradient_norm(res.x, g, lo, hi);
        if (res.projected_gradient_norm <= opts.tol) {
            res.iterations = it;
            res.converged = true;
            return res;
        }

        x_prev = res.x;
        g_prev = g;
        for (std::size_t i = 0; i < n; ++i) res.x[i] -= step * g[i];
        project(res.x, lo, hi);
        g = gradient(res.x);

        // Barzilai-Borwein step length, safeguarded.
        double sts = 0.0, sty = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = res.x[i] - x_prev[i];
            const double y = g[i] - g_prev[i];
            sts += s * s;
            sty += s * y;
        }
        if (sty > 0.0 && sts > 0.0) {
            step = std::clamp(sts / sty, 1e-12, 1e12);
        }
        res.iterations = it + 1;
    }
    res.projected_gradient_norm = projected_gradient_norm(res.x, g, lo, hi);
    res.converged = res.projected_gradient_norm <= opts.tol;
    return res;
}

BoundedLsResult solve_bound_constrained_ls(
    const DenseMatrix& design, const std::vector<double>& target,
    const std::vector<double>& lo, const std::vector<double>& hi,
    const std::vector<double>& start, const BoundedLsOptions& opts) {
    if (design.rows != target.size() || design.cols != start.size()) {
        throw std::invalid_argument("bounded ls: design dimensions mismatch");
    }
    return solve_bound_constrained_ls(
        [&design](const std::vector<double>& x) { return design.apply(x); },
        [&design](const std::vector<double>& r) { return design.apply_transpose(r); },
        target, lo, hi, start, opts);
}

}  // namespace amrisk
