#pragma once

#include <string>
#include <vector>

#include "amrisk/heston.hpp"

namespace amrisk {

struct Quote {
    double strike;
    double maturity;
    double price;
};

/// European call quotes on a strike x maturity lattice, the calibration
/// target. Prices must respect the no-arbitrage bounds and be
/// nonincreasing in strike at fixed maturity.
struct QuoteSurface {
    std::vector<Quote> quotes;
    std::string generating_model;

    std::vector<double> strikes() const;
    std::vector<double> maturities() const;

    const Quote& find(double strike, double maturity) const;
    void validate(double spot, double r) const;
};

/// The lattice of the study: strikes 7, 7.25, ..., 13 and maturities
/// 0.25, 0.5, 0.75, 1 (100 pairs), priced at (t=0, S(0), v(0)).
QuoteSurface make_heston_quote_surface(const HestonParams& p);

/// Same lattice priced with the Black-Scholes closed form (test oracle
/// and degenerate-calibration input).
QuoteSurface make_bs_quote_surface(double sigma, double r, double spot);

void write_quotes_csv(const QuoteSurface& surface, const std::string& path);
QuoteSurface read_quotes_csv(const std::string& path);

}  // namespace amrisk
