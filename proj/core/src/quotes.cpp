#include "amrisk/quotes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace amrisk {

namespace {

std::vector<double> lattice_strikes() {
    std::vector<double> ks;
    for (int i = 0; i <= 24; ++i) ks.push_back(7.0 + 0.25 * i);
    return ks;
}

const std::vector<double> kLatticeMaturities{0.25, 0.5, 0.75, 1.0};

}  // namespace

std::vector<double> QuoteSurface::strikes() const {
    std::set<double> s;
    for (const Quote& q : quotes) s.insert(q.strike);
    return {s.begin(), s.end()};
}

std::vector<double> QuoteSurface::maturities() const {
    std::set<double> s;
    for (const Quote& q : quotes) s.insert(q.maturity);
    return {s.begin(), s.end()};
}

const Quote& QuoteSurface::find(double strike, double maturity) const {
    for (const Quote& q : quotes) {
        if (std::fabs(q.strike - strike) < 1e-9 && std::fabs(q.maturity - maturity) < 1e-9) {
            return q;
        }
    }
    throw std::invalid_argument("quote surface: requested quote not present");
}

void QuoteSurface::validate(double spot, double r) const {
    for (const Quote& q : quotes) {
        const double lower = std::max(spot - q.strike * std::exp(-r * q.maturity), 0.0);
        if (!(q.price >= lower && q.price <= spot)) {
            throw std::invalid_argument("quote surface: price violates arbitrage bounds");
        }
    }
    for (double T : maturities()) {
        double prev = 1e300;
        for (double K : strikes()) {
            const double c = find(K, T).price;
            if (c > prev + 1e-12) {
                throw std::invalid_argument("quote surface: price increasing in strike");
            }
            prev = c;
        }
    }
}

QuoteSurface make_heston_quote_surface(const HestonParams& p) {
    p.validate();
    QuoteSurface out;
    out.generating_model = "heston";
    for (double K : lattice_strikes()) {
        for (double T : kLatticeMaturities) {
            OptionSpec spec{K, T, OptionKind::Call, ExerciseStyle::European};
            out.quotes.push_back({K, T, heston_european_call(p, spec, 0.0, p.s0, p.v0)});
        }
    }
    return out;
}

QuoteSurface make_bs_quote_surface(double sigma, double r, double spot) {
    QuoteSurface out;
    out.generating_model = "black_scholes";
    for (double K : lattice_strikes()) {
        for (double T : kLatticeMaturities) {
            OptionSpec spec{K, T, OptionKind::Call, ExerciseStyle::European};
            out.quotes.push_back({K, T, bs_price(sigma, r, spot, spec)});
        }
    }
    return out;
}

void write_quotes_csv(const QuoteSurface& surface, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "strike,maturity,price\n" << std::setprecision(17);
    for (const Quote& q : surface.quotes) {
        f << q.strike << ',' << q.maturity << ',' << q.price << '\n';
    }
}

QuoteSurface read_quotes_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    QuoteSurface out;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Quote q{};
        char comma;
        ss >> q.strike >> comma >> q.maturity >> comma >> q.price;
        if (!ss) throw std::runtime_error("malformed quote line: " + line);
        out.quotes.push_back(q);
    }
    return out;
}

}  // namespace amrisk
