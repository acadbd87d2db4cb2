#pragma once

// Direct transcription of one Craig-Sneyd step (parameter 1/2), coded
// against the textbook listing independently of the production stepper.

#include <vector>

#include "amrisk/linalg.hpp"
#include "amrisk/pde2d.hpp"

namespace oracles {

inline std::vector<double> craig_sneyd_step(const amrisk::SplitOperator& op, double dt,
                                            const std::vector<double>& state,
                                            const amrisk::SplitOperator::BoundaryVectors& b) {
    using amrisk::BandedMatrix;
    const std::size_t m = op.size();
    const double lambda = 0.5;

    const auto apply = [&](void (amrisk::SplitOperator::*fn)(const double*, double*) const,
                           const std::vector<double>& x) {
        std::vector<double> y(m);
        (op.*fn)(x.data(), y.data());
        return y;
    };
    // dense-ish solve via banded factorizations rebuilt on the fly
    const auto solve_dir1 = [&](std::vector<double> rhs) {
        const std::size_t ns = op.interior_s();
        const std::size_t nv = op.levels_v();
        for (std::size_t j = 0; j < nv; ++j) {
            amrisk::TridiagonalMatrix tri{std::vector<double>(ns - 1), std::vector<double>(ns),
                                          std::vector<double>(ns - 1)};
            for (std::size_t k = 0; k < ns; ++k) {
                tri.diag[k] = 1.0 - lambda * dt * op.a1_band(j, k, 0);
                if (k > 0) tri.lower[k - 1] = -lambda * dt * op.a1_band(j, k, -1);
                if (k + 1 < ns) tri.upper[k] = -lambda * dt * op.a1_band(j, k, 1);
            }
            const std::vector<double> seg(rhs.begin() + j * ns, rhs.begin() + (j + 1) * ns);
            const std::vector<double> sol = amrisk::solve_tridiagonal(tri, seg);
            std::copy(sol.begin(), sol.end(), rhs.begin() + j * ns);
        }
        return rhs;
    };
    const auto solve_dir2 = [&](std::vector<double> rhs) {
        const std::size_t ns = op.interior_s();
        const std::size_t nv = op.levels_v();
        for (std::size_t k = 0; k < ns; ++k) {
            BandedMatrix band(nv, 2, 2);
            for (std::size_t j = 0; j < nv; ++j) {
                for (int d = -2; d <= 2; ++d) {
                    const long tj = static_cast<long>(j) + d;
                    if (tj < 0 || tj >= static_cast<long>(nv)) continue;
                    double w = -lambda * dt * op.a2_band(k, j, d);
                    if (d == 0) w += 1.0;
                    band.at(j, d) = w;
                }
            }
            band.factorize();
            std::vector<double> col(nv);
            for (std::size_t j = 0; j < nv; ++j) col[j] = rhs[j * ns + k];
            const std::vector<double> sol = band.solve_factored(col);
            for (std::size_t j = 0; j < nv; ++j) rhs[j * ns + k] = sol[j];
        }
        return rhs;
    };

    const std::vector<double> a0v = apply(&amrisk::SplitOperator::apply_a0, state);
    const std::vector<double> a1v = apply(&amrisk::SplitOperator::apply_a1, state);
    const std::vector<double> a2v = apply(&amrisk::SplitOperator::apply_a2, state);

    std::vector<double> y0(m);
    for (std::size_t i = 0; i < m; ++i) {
        y0[i] = state[i] + dt * (a0v[i] + a1v[i] + a2v[i] + b.total[i]);
    }
    std::vector<double> y1 = y0;
    for (std::size_t i = 0; i < m; ++i) y1[i] -= lambda * dt * a1v[i];
    y1 = solve_dir1(std::move(y1));
    std::vector<double> y2 = y1;
    for (std::size_t i = 0; i < m; ++i) y2[i] -= lambda * dt * a2v[i];
    y2 = solve_dir2(std::move(y2));

    std::vector<double> diff(m);
    for (std::size_t i = 0; i < m; ++i) diff[i] = y2[i] - state[i];
    const std::vector<double> a0d = apply(&amrisk::SplitOperator::apply_a0, diff);

    std::vector<double> yt0(m);
    for (std::size_t i = 0; i < m; ++i) yt0[i] = y0[i] + lambda * dt * a0d[i];

    std::vector<double> yt1 = yt0;
    for (std::size_t i = 0; i < m; ++i) yt1[i] -= lambda * dt * a1v[i];
    yt1 = solve_dir1(std::move(yt1));
    std::vector<double> yt2 = yt1;
    for (std::size_t i = 0; i < m; ++i) yt2[i] -= lambda * dt * a2v[i];
    return solve_dir2(std::move(yt2));
}

}  // namespace oracles
