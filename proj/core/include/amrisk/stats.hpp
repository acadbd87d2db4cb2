#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace amrisk {

/// Discounted-payoff summary. Quantiles use linear interpolation of
/// order statistics (type 7); SE is the sample standard deviation over
/// sqrt(n).
struct SummaryStats {
    std::size_t count = 0;
    double median = 0.0;
    double mean = 0.0;
    double se_mean = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

SummaryStats summarize(const std::vector<double>& sample);

/// Type-7 quantile of an unsorted sample.
double quantile(std::vector<double> sample, double level);

/// Type-7 quantile of an already sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double level);

/// Standard error of a sample quantile, via a finite-difference density
/// estimate on the order statistics.
double quantile_se(const std::vector<double>& sorted, double level);

/// Matched empirical quantiles of two samples at levels k/(n+1).
std::vector<std::pair<double, double>> qq_pairs(const std::vector<double>& a,
                                                const std::vector<double>& b,
                                                std::size_t n_quantiles);

}  // namespace amrisk
