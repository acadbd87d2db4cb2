#include "amrisk/pde1d.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "amrisk/linalg.hpp"

namespace amrisk {

void Solver1DConfig::validate() const {
    if (n1 < 1 || n2 < 3) throw std::invalid_argument("solver1d: grid too small");
    if (!(x0 < x_max)) throw std::invalid_argument("solver1d: x0 must be below x_max");
    if (!(lambda1 >= 0.0 && lambda1 <= 1.0)) {
        throw std::invalid_argument("solver1d: lambda1 must lie in [0,1]");
    }
}

double ExerciseBoundary1D::at_time(double t) const {
    if (times.empty()) throw std::logic_error("boundary: empty");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    // left-continuous: value of the latest node <= t
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin()) - 1;
    return values[j];
}

double Solution1D::at_spot(std::size_t j, double spot) const {
    const double xq = std::log(spot);
    const std::size_t n = x.size();
    if (xq <= x.front()) return at(j, 0);
    if (xq >= x.back()) return at(j, n - 1);
    std::size_t i = x.locate(xq);
    if (i + 1 >= n) i = n - 2;
    const double w = (xq - x[i]) / x.spacing(i + 1);
    return at(j, i) * (1.0 - w) + at(j, i + 1) * w;
}

namespace {

struct StepWorkspace {
    std::vector<double> l, c, u;           // M_j bands over interior nodes
    TridiagonalMatrix lhs;
    std::vector<double> rhs, sol, scratch;
};

// One theta-weighted step of the tridiagonal scheme: fills bands from the
// frozen time-t_j coefficients, assembles the right-hand side from the
// known level j+1 and the boundary vector, and solves for the interior.
void step_1d(const LocalVolFn& vol, const Grid1D& xg, double t_j, double dt, double r,
             double lambda1, double bc_lo_j, double bc_lo_jp1, double bc_hi_j,
             double bc_hi_jp1, const std::vector<double>& level_jp1,
             std::vector<double>& level_j, StepWorkspace& ws) {
    const std::size_t n2 = xg.max_index();
    const std::size_t ni = n2 - 1;  // interior count
    const double dx = xg.spacing(1);
    const double alpha = dt / (dx * dx);

    ws.l.resize(ni);
    ws.c.resize(ni);
    ws.u.resize(ni);
    for (std::size_t k = 0; k < ni; ++k) {
        const std::size_t i = k + 1;
        const double sig = vol.sigma(t_j, std::exp(xg[i]));
        if (!(sig >= kSigmaMin && sig <= kSigmaMax)) {
            throw NumericalError("solver1d: volatility bound violation");
        }
        const double v = sig * sig;
        const double w = r - 0.5 * v;
        ws.l[k] = 0.5 * alpha * (v - dx * w);
        ws.c[k] = -alpha * v;
        ws.u[k] = 0.5 * alpha * (v + dx * w);
    }

    ws.lhs.lower.resize(ni - 1);
    ws.lhs.diag.resize(ni);
    ws.lhs.upper.resize(ni - 1);
    const double th = 1.0 - lambda1;  // implicit weight
    for (std::size_t k = 0; k < ni; ++k) {
        ws.lhs.diag[k] = 1.0 + r * dt - th * ws.c[k];
        if (k > 0) ws.lhs.lower[k - 1] = -th * ws.l[k];
        if (k + 1 < ni) ws.lhs.upper[k] = -th * ws.u[k];
    }

    ws.rhs.resize(ni);
    for (std::size_t k = 0; k < ni; ++k) {
        const std::size_t i = k + 1;
        double m_u = ws.c[k] * level_jp1[i];
        if (i > 1) m_u += ws.l[k] * level_jp1[i - 1];
        if (i < n2 - 1) m_u += ws.u[k] * level_jp1[i + 1];
        ws.rhs[k] = level_jp1[i] + lambda1 * m_u;
    }
    ws.rhs.front() += ws.l[0] * (th * bc_lo_j + lambda1 * bc_lo_jp1);
    ws.rhs.back() += ws.u[ni - 1] * (th * bc_hi_j + lambda1 * bc_hi_jp1);

    ws.sol.resize(ni);
    ws.scratch.resize(ni);
    solve_tridiagonal(ws.lhs, ws.rhs.data(), ws.sol.data(), ws.scratch.data());

    level_j[0] = bc_lo_j;
    level_j[n2] = bc_hi_j;
    for (std::size_t k = 0; k < ni; ++k) level_j[k + 1] = ws.sol[k];
}

}  // namespace

American1DResult price_american_put_1d(const LocalVolFn& vol, const Solver1DConfig& cfg,
                                       double strike, double maturity, double r) {
    cfg.validate();
    if (!(strike > 0.0) || !(maturity > 0.0)) {
        throw std::invalid_argument("american put 1d: strike and maturity must be positive");
    }
    Grid1D xg = cfg.x_grid();
    if (!(std::log(strike) > xg.front() && std::log(strike) < xg.back())) {
        throw std::invalid_argument("american put 1d: strike outside the exp(x) range");
    }

    const std::size_t n1 = cfg.n1;
    const std::size_t nn = xg.size();
    const double dt = maturity / static_cast<double>(n1);

    std::vector<double> payoff(nn);
    for (std::size_t i = 0; i < nn; ++i) payoff[i] = std::max(strike - std::exp(xg[i]), 0.0);

    Solution1D sol;
    sol.x = xg;
    sol.times.resize(n1 + 1);
    for (std::size_t j = 0; j <= n1; ++j) sol.times[j] = dt * static_cast<double>(j);
    sol.values.assign((n1 + 1) * nn, 0.0);

    // terminal condition
    std::copy(payoff.begin(), payoff.end(), sol.values.begin() + n1 * nn);

    const double bc_lo = strike - std::exp(xg.front());
    const double bc_hi = 0.0;

    StepWorkspace ws;
    std::vector<double> level(nn);
    std::vector<double> level_next(payoff);
    for (std::size_t j = n1; j-- > 0;) {
        step_1d(vol, xg, sol.times[j], dt, r, cfg.lambda1, bc_lo, bc_lo, bc_hi, bc_hi,
                level_next, level, ws);
        for (std::size_t i = 0; i < nn; ++i) level[i] = std::max(level[i], payoff[i]);
        std::copy(level.begin(), level.end(), sol.values.begin() + j * nn);
        level_next = level;
    }

    American1DResult out;
    out.boundary = extract_boundary_1d(sol, payoff, strike);
    out.solution = std::move(sol);
    return out;
}

Solution1D price_european_call_1d(const LocalVolFn& vol, const Solver1DConfig& cfg,
                                  double strike, double maturity, double r) {
    cfg.validate();
    if (!(strike >= 0.0) || !(maturity > 0.0)) {
        throw std::invalid_argument("european call 1d: bad strike or maturity");
    }
    Grid1D xg = cfg.x_grid();
    const std::size_t n1 = cfg.n1;
    const std::size_t nn = xg.size();
    const double dt = maturity / static_cast<double>(n1);

    Solution1D sol;
    sol.x = xg;
    sol.times.resize(n1 + 1);
    for (std::size_t j = 0; j <= n1; ++j) sol.times[j] = dt * static_cast<double>(j);
    sol.values.assign((n1 + 1) * nn, 0.0);

    std::vector<double> level_next(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        level_next[i] = std::max(std::exp(xg[i]) - strike, 0.0);
    }
    std::copy(level_next.begin(), level_next.end(), sol.values.begin() + n1 * nn);

    const double s_hi = std::exp(xg.back());
    const auto bc_hi = [&](double t) { return s_hi - strike * std::exp(-r * (maturity - t)); };

    StepWorkspace ws;
    std::vector<double> level(nn);
    for (std::size_t j = n1; j-- > 0;) {
        step_1d(vol, xg, sol.times[j], dt, r, cfg.lambda1, 0.0, 0.0, bc_hi(sol.times[j]),
                bc_hi(sol.times[j + 1]), level_next, level, ws);
        std::copy(level.begin(), level.end(), sol.values.begin() + j * nn);
        level_next = level;
    }
    return sol;
}

ExerciseBoundary1D extract_boundary_1d(const Solution1D& solution,
                                       const std::vector<double>& payoff, double strike) {
    const std::size_t nn = solution.x.size();
    if (payoff.size() != nn) throw std::invalid_argument("extract boundary: payoff size mismatch");
    const double eps = 1e-9 * strike;

    ExerciseBoundary1D b;
    b.times = solution.times;
    b.values.assign(solution.times.size(), 0.0);
    for (std::size_t j = 0; j < solution.times.size(); ++j) {
        double bj = 0.0;
        for (std::size_t i = nn - 1; i-- > 1;) {
            if (payoff[i] > 0.0 && solution.at(j, i) <= payoff[i] + eps) {
                bj = std::exp(solution.x[i]);
                break;
            }
        }
        b.values[j] = bj;
    }
    return b;
}

void write_boundary_csv(const ExerciseBoundary1D& boundary, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "t,boundary_price\n" << std::setprecision(12);
    for (std::size_t j = 0; j < boundary.times.size(); ++j) {
        f << boundary.times[j] << ',' << boundary.values[j] << '\n';
    }
}

}  // namespace amrisk
