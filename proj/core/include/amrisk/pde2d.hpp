#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "amrisk/grid.hpp"
#include "amrisk/heston.hpp"
#include "amrisk/linalg.hpp"
#include "amrisk/spline.hpp"

namespace amrisk {

/// Interior-point discretization of the Heston generator, split into a
/// mixed-derivative part A0, an S-direction part A1 and a v-direction
/// part A2 (the -rV term is shared equally between A1 and A2). Grid
/// ordering is S-major within each v-level; dimension m = (m1-1)*m2.
/// Dirichlet data is folded into per-face weight vectors so boundary
/// vectors can be rebuilt for any face values.
class SplitOperator {
public:
    SplitOperator(const Grid1D& grid_s, const Grid1D& grid_v, const HestonParams& p);

    std::size_t size() const { return m_; }
    std::size_t interior_s() const { return ns_; }
    std::size_t levels_v() const { return nv_; }
    const Grid1D& grid_s() const { return gs_; }
    const Grid1D& grid_v() const { return gv_; }

    std::size_t index(std::size_t i, std::size_t j) const { return (i - 1) + ns_ * j; }

    void apply_a0(const double* x, double* y) const;
    void apply_a1(const double* x, double* y) const;
    void apply_a2(const double* x, double* y) const;
    /// y = (A0 + A1 + A2) x
    void apply_full(const double* x, double* y) const;

    struct BoundaryVectors {
        std::vector<double> b0, b1, b2, total;
    };
    /// Boundary vectors for Dirichlet values on the three faces; the
    /// S = s_max value wins at the (s_max, v_max) corner.
    BoundaryVectors boundary(double value_s0, double value_smax, double value_vmax) const;

    // Band access used by the time stepper to build implicit systems.
    double a1_band(std::size_t j, std::size_t k, int d) const {
        return a1_[(j * ns_ + k) * 3 + static_cast<std::size_t>(d + 1)];
    }
    double a2_band(std::size_t i_interior, std::size_t j, int d) const {
        return a2_[(j * ns_ + i_interior) * 5 + static_cast<std::size_t>(d + 2)];
    }

private:
    Grid1D gs_, gv_;
    std::size_t ns_, nv_, m_;
    std::vector<double> a1_;  // 3 bands per node, S-direction
    std::vector<double> a2_;  // 5 bands per node, v-direction
    // mixed derivative in CSR form
    std::vector<std::size_t> a0_row_;
    std::vector<std::size_t> a0_col_;
    std::vector<double> a0_val_;
    // per-part boundary weights for the three Dirichlet faces
    std::vector<double> w_s0_0_, w_smax_0_, w_vmax_0_;
    std::vector<double> w_s0_1_, w_smax_1_;
    std::vector<double> w_vmax_2_;
};

/// Modified Craig-Sneyd parameters: lambda2 in (0,1], default 0.4; the
/// scheme coincides with Craig-Sneyd at lambda2 = 1/2. m3 time steps.
struct MCSConfig {
    double lambda2 = 0.4;
    std::size_t m3 = 300;

    void validate() const;
};

/// Runs MCS stages with the two unidirectional factorizations computed
/// once and reused across all time steps.
class MCSStepper {
public:
    MCSStepper(const SplitOperator& op, const MCSConfig& cfg, double dt);

    /// One step from state at t_{n-1} to t_n, with boundary vectors at
    /// both levels (identical objects when the data is constant).
    std::vector<double> step(const std::vector<double>& state,
                             const SplitOperator::BoundaryVectors& b_prev,
                             const SplitOperator::BoundaryVectors& b_next) const;

private:
    const SplitOperator& op_;
    double lambda2_, dt_;
    // factored (I - lambda2 dt A1): one tridiagonal system per v-level
    struct FactoredTridiag {
        std::vector<double> low, piv, upr;
    };
    std::vector<FactoredTridiag> f1_;
    std::vector<BandedMatrix> f2_;  // factored (I - lambda2 dt A2) per s-index

    void solve1(std::vector<double>& x) const;
    void solve2(std::vector<double>& x) const;
};

/// Exercise threshold surface B(t, v): raw values per (time node,
/// interior v-level) plus a natural spline in v per time node. Queries
/// use the nearest earlier time node; v is capped at 2 and the result
/// clamped to [0, K].
class ExerciseBoundary2D {
public:
    ExerciseBoundary2D() = default;
    ExerciseBoundary2D(std::vector<double> times, std::vector<double> v_knots,
                       std::vector<double> raw, double strike);

    double eval(double t, double v) const;
    double raw_at(std::size_t time_index, std::size_t v_index) const {
        return raw_[time_index * v_knots_.size() + v_index];
    }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& v_knots() const { return v_knots_; }
    double strike() const { return strike_; }

    /// Spline evaluation on the refined grid v = 0, 0.01, ..., 2.
    std::vector<double> refined_row(std::size_t time_index) const;
    static std::vector<double> refined_v_grid();

private:
    std::size_t time_row(double t) const;

    std::vector<double> times_, v_knots_, raw_;
    std::vector<CubicSpline> splines_;
    double strike_ = 0.0;
};

/// Interior value surface with bilinear evaluation.
struct HestonValueSurface {
    Grid1D grid_s;
    Grid1D grid_v;
    std::vector<double> values;  // interior ordering as SplitOperator

    double at(double spot, double v) const;
};

struct Heston2DResult {
    HestonValueSurface value;  // at t = 0
    ExerciseBoundary2D boundary;
};

/// Default study grids: m1=500, m2=110, s_max = 8 S(0), v_max = 4.5,
/// c = K/5, d = v_max/80.
struct HestonGridSpec {
    std::size_t m1 = 500;
    std::size_t m2 = 110;
    double s_max_multiple = 8.0;
    double v_max = 4.5;

    Grid1D stock_grid(double strike, double s0) const {
        return build_sinh_stock_grid(strike, s_max_multiple * s0, strike / 5.0, m1);
    }
    Grid1D variance_grid() const {
        return build_sinh_variance_grid(v_max, v_max / 80.0, m2);
    }
};

/// American put by forward iteration in time-to-maturity: MCS stage then
/// elementwise projection onto the intrinsic payoff; per-level boundary
/// extraction with spline interpolation in v.
Heston2DResult price_american_put_heston(const HestonParams& p, const Grid1D& grid_s,
                                         const Grid1D& grid_v, const MCSConfig& cfg,
                                         double strike, double maturity);

/// European put, no projection, discounted boundary data (test hook for
/// the scheme against the characteristic-function price).
HestonValueSurface price_european_put_heston(const HestonParams& p, const Grid1D& grid_s,
                                             const Grid1D& grid_v, const MCSConfig& cfg,
                                             double strike, double maturity);

void write_boundary2d_csv(const ExerciseBoundary2D& boundary, const std::string& raw_path,
                          const std::string& spline_path);

}  // namespace amrisk
