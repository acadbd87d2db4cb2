#include "amrisk/pde2d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace amrisk {

SplitOperator::SplitOperator(const Grid1D& grid_s, const Grid1D& grid_v, const HestonParams& p)
    : gs_(grid_s), gv_(grid_v) {
    if (!(gv_.back() > 1.0)) {
        throw std::invalid_argument("split operator: variance grid must reach beyond 1");
    }
    const std::size_t m1 = gs_.max_index();
    const std::size_t m2 = gv_.max_index();
    ns_ = m1 - 1;
    nv_ = m2;
    m_ = ns_ * nv_;

    a1_.assign(m_ * 3, 0.0);
    a2_.assign(m_ * 5, 0.0);
    w_s0_0_.assign(m_, 0.0);
    w_smax_0_.assign(m_, 0.0);
    w_vmax_0_.assign(m_, 0.0);
    w_s0_1_.assign(m_, 0.0);
    w_smax_1_.assign(m_, 0.0);
    w_vmax_2_.assign(m_, 0.0);

    a0_row_.assign(m_ + 1, 0);
    const bool has_mixed = p.rho * p.sigma_v != 0.0;

    for (std::size_t j = 0; j < nv_; ++j) {
        const double vj = gv_[j];
        for (std::size_t i = 1; i <= m1 - 1; ++i) {
            const double si = gs_[i];
            const std::size_t idx = index(i, j);

            // S-direction: central convection + central diffusion - r/2.
            {
                const double conv = p.r * si;
                const double diff = 0.5 * vj * si * si;
                const StencilCoeffs c1 = fd_first_coeffs(gs_, i, StencilScheme::Central);
                const StencilCoeffs c2 = fd_second_coeffs(gs_, i, StencilScheme::Central);
                for (int k = 0; k < 3; ++k) {
                    const double w = conv * c1.weights[k] + diff * c2.weights[k];
                    const std::size_t tgt = i + static_cast<std::size_t>(c1.offsets[k] + 1) - 1;
                    if (tgt == 0) {
                        w_s0_1_[idx] += w;
                    } else if (tgt == m1) {
                        w_smax_1_[idx] += w;
                    } else {
                        a1_[idx * 3 + static_cast<std::size_t>(c1.offsets[k] + 1)] += w;
                    }
                }
                a1_[idx * 3 + 1] -= 0.5 * p.r;
            }

            // v-direction: scheme selection by variance level.
            {
                const double conv = p.kappa * (p.theta - vj);
                StencilScheme scheme;
                if (j == 0) {
                    scheme = StencilScheme::Upward;
                } else if (vj > 1.0) {
                    scheme = (j >= 2) ? StencilScheme::Downward : StencilScheme::Central;
                } else {
                    scheme = StencilScheme::Central;
                }
                const StencilCoeffs c1 = fd_first_coeffs(gv_, j, scheme);
                for (int k = 0; k < 3; ++k) {
                    const double w = conv * c1.weights[k];
                    const std::size_t tgt = j + static_cast<std::size_t>(c1.offsets[k] + 2) - 2;
                    if (tgt == m2) {
                        w_vmax_2_[idx] += w;
                    } else {
                        a2_[idx * 5 + static_cast<std::size_t>(c1.offsets[k] + 2)] += w;
                    }
                }
                if (j >= 1) {
                    const double diff = 0.5 * p.sigma_v * p.sigma_v * vj;
                    const StencilCoeffs c2 = fd_second_coeffs(gv_, j, StencilScheme::Central);
                    for (int k = 0; k < 3; ++k) {
                        const double w = diff * c2.weights[k];
                        const std::size_t tgt = j + static_cast<std::size_t>(c2.offsets[k] + 2) - 2;
                        if (tgt == m2) {
                            w_vmax_2_[idx] += w;
                        } else {
                            a2_[idx * 5 + static_cast<std::size_t>(c2.offsets[k] + 2)] += w;
                        }
                    }
                }
                a2_[idx * 5 + 2] -= 0.5 * p.r;
            }

            // mixed derivative: central x central tensor, vanishes at v = 0
            a0_row_[idx + 1] = a0_col_.size();
            if (has_mixed && j >= 1) {
                const double mix = p.rho * p.sigma_v * vj * si;
                const MixedStencil ms = fd_mixed_coeffs(gs_, gv_, i, j, StencilScheme::Central);
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b) {
                        const double w = mix * ms.weights[a][b];
                        if (w == 0.0) continue;
                        const std::size_t ti = i + static_cast<std::size_t>(ms.s_offsets[a] + 1) - 1;
                        const std::size_t tj = j + static_cast<std::size_t>(ms.v_offsets[b] + 1) - 1;
                        if (ti == 0) {
                            w_s0_0_[idx] += w;
                        } else if (ti == m1) {
                            w_smax_0_[idx] += w;
                        } else if (tj == m2) {
                            w_vmax_0_[idx] += w;
                        } else {
                            a0_col_.push_back(index(ti, tj));
                            a0_val_.push_back(w);
                        }
                    }
                }
                a0_row_[idx + 1] = a0_col_.size();
            }
        }
    }
    // prefix structure: each row end recorded above; rows with no entries
    // inherit the previous end
    for (std::size_t rr = 1; rr <= m_; ++rr) {
        a0_row_[rr] = std::max(a0_row_[rr], a0_row_[rr - 1]);
    }
}

void SplitOperator::apply_a0(const double* x, double* y) const {
    for (std::size_t r = 0; r < m_; ++r) {
        double s = 0.0;
        for (std::size_t k = a0_row_[r]; k < a0_row_[r + 1]; ++k) {
            s += a0_val_[k] * x[a0_col_[k]];
        }
        y[r] = s;
    }
}

void SplitOperator::apply_a1(const double* x, double* y) const {
    for (std::size_t j = 0; j < nv_; ++j) {
        const std::size_t base = j * ns_;
        for (std::size_t k = 0; k < ns_; ++k) {
            const std::size_t idx = base + k;
            double s = a1_[idx * 3 + 1] * x[idx];
            if (k > 0) s += a1_[idx * 3 + 0] * x[idx - 1];
            if (k + 1 < ns_) s += a1_[idx * 3 + 2] * x[idx + 1];
            y[idx] = s;
        }
    }
}

void SplitOperator::apply_a2(const double* x, double* y) const {
    const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(ns_);
    for (std::size_t j = 0; j < nv_; ++j) {
        for (std::size_t k = 0; k < ns_; ++k) {
            const std::size_t idx = j * ns_ + k;
            double s = 0.0;
            for (int d = -2; d <= 2; ++d) {
                const double w = a2_[idx * 5 + static_cast<std::size_t>(d + 2)];
                if (w == 0.0) continue;
                s += w * x[static_cast<std::ptrdiff_t>(idx) + d * stride];
            }
            y[idx] = s;
        }
    }
}

void SplitOperator::apply_full(const double* x, double* y) const {
    std::vector<double> t0(m_), t1(m_), t2(m_);
    apply_a0(x, t0.data());
    apply_a1(x, t1.data());
    apply_a2(x, t2.data());
    for (std::size_t r = 0; r < m_; ++r) y[r] = t0[r] + t1[r] + t2[r];
}

SplitOperator::BoundaryVectors SplitOperator::boundary(double value_s0, double value_smax,
                                                       double value_vmax) const {
    BoundaryVectors b;
    b.b0.resize(m_);
    b.b1.resize(m_);
    b.b2.resize(m_);
    b.total.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
        b.b0[r] = w_s0_0_[r] * value_s0 + w_smax_0_[r] * value_smax + w_vmax_0_[r] * value_vmax;
        b.b1[r] = w_s0_1_[r] * value_s0 + w_smax_1_[r] * value_smax;
        b.b2[r] = w_vmax_2_[r] * value_vmax;
        b.total[r] = b.b0[r] + b.b1[r] + b.b2[r];
    }
    return b;
}

void MCSConfig::validate() const {
    if (!(lambda2 > 0.0 && lambda2 <= 1.0)) {
        throw std::invalid_argument("mcs: lambda2 must lie in (0, 1]");
    }
    if (m3 < 1) throw std::invalid_argument("mcs: need at least one time step");
}

MCSStepper::MCSStepper(const SplitOperator& op, const MCSConfig& cfg, double dt)
    : op_(op), lambda2_(cfg.lambda2), dt_(dt) {
    cfg.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("mcs: dt must be positive");
    const std::size_t ns = op_.interior_s();
    const std::size_t nv = op_.levels_v();
    const double c = lambda2_ * dt_;

    f1_.resize(nv);
    for (std::size_t j = 0; j < nv; ++j) {
        FactoredTridiag& f = f1_[j];
        f.low.assign(ns, 0.0);
        f.piv.assign(ns, 0.0);
        f.upr.assign(ns, 0.0);
        std::vector<double> diag(ns), up(ns);
        for (std::size_t k = 0; k < ns; ++k) {
            diag[k] = 1.0 - c * op_.a1_band(j, k, 0);
            f.low[k] = (k > 0) ? -c * op_.a1_band(j, k, -1) : 0.0;
            up[k] = (k + 1 < ns) ? -c * op_.a1_band(j, k, 1) : 0.0;
        }
        double piv = diag[0];
        for (std::size_t k = 0;; ++k) {
            if (std::fabs(piv) < 1e-300) throw NumericalError("mcs: singular S-direction system");
            f.piv[k] = piv;
            if (k + 1 == ns) break;
            f.upr[k] = up[k] / piv;
            piv = diag[k + 1] - f.low[k + 1] * f.upr[k];
        }
    }

    f2_.reserve(ns);
    for (std::size_t k = 0; k < ns; ++k) {
        BandedMatrix band(nv, 2, 2);
        for (std::size_t j = 0; j < nv; ++j) {
            for (int d = -2; d <= 2; ++d) {
                const long tj = static_cast<long>(j) + d;
                if (tj < 0 || tj >= static_cast<long>(nv)) continue;
                double w = -c * op_.a2_band(k, j, d);
                if (d == 0) w += 1.0;
                band.at(j, d) = w;
            }
        }
        band.factorize();
        f2_.push_back(std::move(band));
    }
}

void MCSStepper::solve1(std::vector<double>& x) const {
    const std::size_t ns = op_.interior_s();
    const std::size_t nv = op_.levels_v();
    for (std::size_t j = 0; j < nv; ++j) {
        double* v = x.data() + j * ns;
        const FactoredTridiag& f = f1_[j];
        v[0] /= f.piv[0];
        for (std::size_t k = 1; k < ns; ++k) {
            v[k] = (v[k] - f.low[k] * v[k - 1]) / f.piv[k];
        }
        for (std::size_t k = ns - 1; k-- > 0;) {
            v[k] -= f.upr[k] * v[k + 1];
        }
    }
}

void MCSStepper::solve2(std::vector<double>& x) const {
    const std::size_t ns = op_.interior_s();
    const std::size_t nv = op_.levels_v();
    std::vector<double> col(nv), out(nv);
    for (std::size_t k = 0; k < ns; ++k) {
        for (std::size_t j = 0; j < nv; ++j) col[j] = x[j * ns + k];
        f2_[k].solve_factored(col.data(), out.data());
        for (std::size_t j = 0; j < nv; ++j) x[j * ns + k] = out[j];
    }
}

std::vector<double> MCSStepper::step(const std::vector<double>& state,
                                     const SplitOperator::BoundaryVectors& b_prev,
                                     const SplitOperator::BoundaryVectors& b_next) const {
    const std::size_t m = op_.size();
    if (state.size() != m) throw std::invalid_argument("mcs step: state size mismatch");
    const double c = lambda2_ * dt_;

    std::vector<double> a0v(m), a1v(m), a2v(m);
    op_.apply_a0(state.data(), a0v.data());
    op_.apply_a1(state.data(), a1v.data());
    op_.apply_a2(state.data(), a2v.data());

    std::vector<double> y0(m);
    for (std::size_t r = 0; r < m; ++r) {
        y0[r] = state[r] + dt_ * (a0v[r] + a1v[r] + a2v[r] + b_prev.total[r]);
    }

    std::vector<double> y(m);
    for (std::size_t r = 0; r < m; ++r) {
        y[r] = y0[r] + c * (b_next.b1[r] - b_prev.b1[r] - a1v[r]);
    }
    solve1(y);  // Y1
    for (std::size_t r = 0; r < m; ++r) {
        y[r] += c * (b_next.b2[r] - b_prev.b2[r] - a2v[r]);
    }
    solve2(y);  // Y2

    std::vector<double> diff(m);
    for (std::size_t r = 0; r < m; ++r) diff[r] = y[r] - state[r];
    std::vector<double> a0d(m);
    op_.apply_a0(diff.data(), a0d.data());

    std::vector<double> yt(m);
    for (std::size_t r = 0; r < m; ++r) {
        yt[r] = y0[r] + c * (a0d[r] + b_next.b0[r] - b_prev.b0[r]);
    }
    const double half = (0.5 - lambda2_) * dt_;
    if (half != 0.0) {
        std::vector<double> a1d(m), a2d(m);
        op_.apply_a1(diff.data(), a1d.data());
        op_.apply_a2(diff.data(), a2d.data());
        for (std::size_t r = 0; r < m; ++r) {
            yt[r] += half * (a0d[r] + a1d[r] + a2d[r] + b_next.total[r] - b_prev.total[r]);
        }
    }

    for (std::size_t r = 0; r < m; ++r) {
        yt[r] += c * (b_next.b1[r] - b_prev.b1[r] - a1v[r]);
    }
    solve1(yt);  // Y1 tilde
    for (std::size_t r = 0; r < m; ++r) {
        yt[r] += c * (b_next.b2[r] - b_prev.b2[r] - a2v[r]);
    }
    solve2(yt);  // Y2 tilde
    return yt;
}

ExerciseBoundary2D::ExerciseBoundary2D(std::vector<double> times, std::vector<double> v_knots,
                                       std::vector<double> raw, double strike)
    : times_(std::move(times)), v_knots_(std::move(v_knots)), raw_(std::move(raw)),
      strike_(strike) {
    if (raw_.size() != times_.size() * v_knots_.size()) {
        throw std::invalid_argument("boundary2d: raw size mismatch");
    }
    splines_.reserve(times_.size());
    for (std::size_t n = 0; n < times_.size(); ++n) {
        std::vector<double> row(raw_.begin() + n * v_knots_.size(),
                                raw_.begin() + (n + 1) * v_knots_.size());
        splines_.emplace_back(v_knots_, std::move(row));
    }
}

std::size_t ExerciseBoundary2D::time_row(double t) const {
    if (t <= times_.front()) return 0;
    if (t >= times_.back()) return times_.size() - 1;
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double ExerciseBoundary2D::eval(double t, double v) const {
    if (v < 0.0) throw std::invalid_argument("boundary2d: v must be nonnegative");
    const double vq = std::min(v, 2.0);
    const double raw_val = splines_[time_row(t)](vq);
    return std::clamp(raw_val, 0.0, strike_);
}

std::vector<double> ExerciseBoundary2D::refined_v_grid() {
    std::vector<double> v(201);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.01 * static_cast<double>(k);
    return v;
}

std::vector<double> ExerciseBoundary2D::refined_row(std::size_t time_index) const {
    const std::vector<double> vg = refined_v_grid();
    std::vector<double> out(vg.size());
    for (std::size_t k = 0; k < vg.size(); ++k) {
        out[k] = std::clamp(splines_[time_index](vg[k]), 0.0, strike_);
    }
    return out;
}

double HestonValueSurface::at(double spot, double v) const {
    const std::size_t m1 = grid_s.max_index();
    const std::size_t ns = m1 - 1;
    const std::size_t nv = values.size() / ns;

    std::size_t i = grid_s.locate(spot);
    i = std::clamp<std::size_t>(i, 1, m1 - 2);
    std::size_t j = grid_v.locate(v);
    j = std::min<std::size_t>(j, nv - 2);

    const double ws = (spot - grid_s[i]) / grid_s.spacing(i + 1);
    const double wv = (v - grid_v[j]) / grid_v.spacing(j + 1);
    auto val = [&](std::size_t ii, std::size_t jj) { return values[(ii - 1) + ns * jj]; };
    const double a = val(i, j) * (1.0 - ws) + val(i + 1, j) * ws;
    const double b = val(i, j + 1) * (1.0 - ws) + val(i + 1, j + 1) * ws;
    return a * (1.0 - wv) + b * wv;
}

namespace {

std::vector<double> intrinsic_put(const SplitOperator& op, double strike) {
    std::vector<double> pay(op.size());
    for (std::size_t j = 0; j < op.levels_v(); ++j) {
        for (std::size_t i = 1; i <= op.interior_s(); ++i) {
            pay[op.index(i, j)] = std::max(strike - op.grid_s()[i], 0.0);
        }
    }
    return pay;
}

std::vector<double> extract_levels(const SplitOperator& op, const std::vector<double>& value,
                                   const std::vector<double>& payoff, double strike) {
    const double eps = 1e-9 * strike;
    std::vector<double> row(op.levels_v(), 0.0);
    for (std::size_t j = 0; j < op.levels_v(); ++j) {
        for (std::size_t i = op.interior_s(); i >= 1; --i) {
            const std::size_t idx = op.index(i, j);
            if (payoff[idx] > 0.0 && value[idx] <= payoff[idx] + eps) {
                row[j] = op.grid_s()[i];
                break;
            }
        }
    }
    return row;
}

}  // namespace

Heston2DResult price_american_put_heston(const HestonParams& p, const Grid1D& grid_s,
                                         const Grid1D& grid_v, const MCSConfig& cfg,
                                         double strike, double maturity) {
    p.validate();
    cfg.validate();
    if (!(strike > 0.0 && maturity > 0.0)) {
        throw std::invalid_argument("heston american put: bad strike or maturity");
    }

    const SplitOperator op(grid_s, grid_v, p);
    const double dt = maturity / static_cast<double>(cfg.m3);
    const MCSStepper stepper(op, cfg, dt);

    const std::vector<double> payoff = intrinsic_put(op, strike);
    const SplitOperator::BoundaryVectors b = op.boundary(strike, 0.0, strike);

    std::vector<double> state = payoff;
    // rows in time-to-maturity order; reversed to calendar order below
    std::vector<std::vector<double>> rows;
    rows.reserve(cfg.m3 + 1);
    rows.push_back(extract_levels(op, state, payoff, strike));

    for (std::size_t n = 1; n <= cfg.m3; ++n) {
        state = stepper.step(state, b, b);
        for (std::size_t r = 0; r < state.size(); ++r) {
            state[r] = std::max(state[r], payoff[r]);
        }
        rows.push_back(extract_levels(op, state, payoff, strike));
    }

    std::vector<double> times(cfg.m3 + 1);
    std::vector<double> raw((cfg.m3 + 1) * op.levels_v());
    for (std::size_t n = 0; n <= cfg.m3; ++n) {
        const std::size_t cal = cfg.m3 - n;  // calendar row for step n
        times[cal] = maturity - static_cast<double>(n) * dt;
        std::copy(rows[n].begin(), rows[n].end(), raw.begin() + cal * op.levels_v());
    }
    times.front() = 0.0;
    times.back() = maturity;

    std::vector<double> v_knots(grid_v.nodes().begin(), grid_v.nodes().begin() + op.levels_v());

    Heston2DResult out;
    out.value = HestonValueSurface{grid_s, grid_v, std::move(state)};
    out.boundary = ExerciseBoundary2D(std::move(times), std::move(v_knots), std::move(raw), strike);
    return out;
}

HestonValueSurface price_european_put_heston(const HestonParams& p, const Grid1D& grid_s,
                                             const Grid1D& grid_v, const MCSConfig& cfg,
                                             double strike, double maturity) {
    p.validate();
    cfg.validate();
    const SplitOperator op(grid_s, grid_v, p);
    const double dt = maturity / static_cast<double>(cfg.m3);
    const MCSStepper stepper(op, cfg, dt);

    std::vector<double> state = intrinsic_put(op, strike);
    auto bc = [&](std::size_t n) {
        const double disc = strike * std::exp(-p.r * dt * static_cast<double>(n));
        return op.boundary(disc, 0.0, disc);
    };
    SplitOperator::BoundaryVectors b_prev = bc(0);
    for (std::size_t n = 1; n <= cfg.m3; ++n) {
        SplitOperator::BoundaryVectors b_next = bc(n);
        state = stepper.step(state, b_prev, b_next);
        b_prev = std::move(b_next);
    }
    return HestonValueSurface{grid_s, grid_v, std::move(state)};
}

void write_boundary2d_csv(const ExerciseBoundary2D& boundary, const std::string& raw_path,
                          const std::string& spline_path) {
    {
        std::ofstream f(raw_path);
        if (!f) throw std::runtime_error("cannot open " + raw_path);
        f << "t,v,boundary_price\n" << std::setprecision(12);
        for (std::size_t n = 0; n < boundary.times().size(); ++n) {
            for (std::size_t j = 0; j < boundary.v_knots().size(); ++j) {
                f << boundary.times()[n] << ',' << boundary.v_knots()[j] << ','
                  << boundary.raw_at(n, j) << '\n';
            }
        }
    }
    {
        std::ofstream f(spline_path);
        if (!f) throw std::runtime_error("cannot open " + spline_path);
        f << "t,v,boundary_price\n" << std::setprecision(12);
        const std::vector<double> vg = ExerciseBoundary2D::refined_v_grid();
        for (std::size_t n = 0; n < boundary.times().size(); ++n) {
            const std::vector<double> row = boundary.refined_row(n);
            for (std::size_t k = 0; k < vg.size(); ++k) {
                f << boundary.times()[n] << ',' << vg[k] << ',' << row[k] << '\n';
            }
        }
    }
}

}  // namespace amrisk
