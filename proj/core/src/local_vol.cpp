#include "amrisk/local_vol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace amrisk {

LocalVolSurface::LocalVolSurface(Grid1D t_grid, Grid1D x_grid, std::vector<double> variance)
    : t_(std::move(t_grid)), x_(std::move(x_grid)), var_(std::move(variance)) {
    if (var_.size() != t_.size() * x_.size()) {
        throw std::invalid_argument("local vol surface: variance grid size mismatch");
    }
    const double lo = kSigmaMin * kSigmaMin;
    const double hi = kSigmaMax * kSigmaMax;
    for (double& v : var_) v = std::clamp(v, lo, hi);
}

double LocalVolSurface::sigma_at_node(std::size_t j, std::size_t i) const {
    return std::sqrt(variance_at_node(j, i));
}

double LocalVolSurface::variance(double t, double x) const {
    const double tc = std::clamp(t, t_.front(), t_.back());
    const double xc = std::clamp(x, x_.front(), x_.back());
    std::size_t j = t_.locate(tc);
    std::size_t i = x_.locate(xc);
    if (j + 1 >= t_.size()) j = t_.size() - 2;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    const double wt = (tc - t_[j]) / t_.spacing(j + 1);
    const double wx = (xc - x_[i]) / x_.spacing(i + 1);
    const double a = variance_at_node(j, i) * (1.0 - wx) + variance_at_node(j, i + 1) * wx;
    const double b = variance_at_node(j + 1, i) * (1.0 - wx) + variance_at_node(j + 1, i + 1) * wx;
    return a * (1.0 - wt) + b * wt;
}

double LocalVolSurface::sigma(double t, double spot) const {
    return std::sqrt(variance(t, std::log(spot)));
}

LocalVolFn LocalVolFn::constant(double sigma) {
    if (!(sigma >= kSigmaMin && sigma <= kSigmaMax)) {
        throw std::invalid_argument("local vol: constant sigma outside [0.01, 6]");
    }
    LocalVolFn fn;
    fn.const_sigma_ = sigma;
    return fn;
}

LocalVolFn LocalVolFn::from_surface(std::shared_ptr<const LocalVolSurface> surface) {
    if (!surface) throw std::invalid_argument("local vol: null surface");
    LocalVolFn fn;
    fn.surface_ = std::move(surface);
    return fn;
}

void write_local_vol_csv(const LocalVolSurface& surface, const std::string& path,
                         std::size_t t_stride, std::size_t x_stride) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "t,S,sigma\n" << std::setprecision(10);
    const Grid1D& tg = surface.time_grid();
    const Grid1D& xg = surface.x_grid();
    for (std::size_t j = 0; j < tg.size(); j += t_stride) {
        for (std::size_t i = 0; i < xg.size(); i += x_stride) {
            f << tg[j] << ',' << std::exp(xg[i]) << ',' << surface.sigma_at_node(j, i) << '\n';
        }
    }
}

}  // namespace amrisk
