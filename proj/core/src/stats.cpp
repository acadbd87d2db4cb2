#include "amrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amrisk {

double quantile_sorted(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
    if (level <= 0.0) return sorted.front();
    if (level >= 1.0) return sorted.back();
    const double h = static_cast<double>(sorted.size() - 1) * level;
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double w = h - static_cast<double>(i);
    return sorted[i] * (1.0 - w) + sorted[i + 1] * w;
}

double quantile(std::vector<double> sample, double level) {
    std::sort(sample.begin(), sample.end());
    return quantile_sorted(sample, level);
}

double quantile_se(const std::vector<double>& sorted, double level) {
    const std::size_t n = sorted.size();
    if (n < 16) return 0.0;
    // density at the quantile from a symmetric order-statistic window
    const double h = static_cast<double>(n - 1) * level;
    const std::size_t win = std::max<std::size_t>(4, n / 200);
    const std::size_t lo = static_cast<std::size_t>(std::max<double>(0.0, h - static_cast<double>(win)));
    const std::size_t hi = std::min(n - 1, static_cast<std::size_t>(h) + win);
    const double spread = sorted[hi] - sorted[lo];
    if (spread <= 0.0) return 0.0;  // quantile sits in an atom
    const double density = static_cast<double>(hi - lo) / (static_cast<double>(n) * spread);
    return std::sqrt(level * (1.0 - level) / static_cast<double>(n)) / density;
}

SummaryStats summarize(const std::vector<double>& sample) {
    if (sample.empty()) throw std::invalid_argument("summarize: empty sample");
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());

    SummaryStats out;
    out.count = sorted.size();
    out.median = quantile_sorted(sorted, 0.5);
    out.q3 = quantile_sorted(sorted, 0.75);
    out.max = sorted.back();

    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(sorted.size());
    out.mean = mean;

    if (sorted.size() > 1) {
        double ss = 0.0;
        for (double v : sorted) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(sorted.size() - 1));
        out.se_mean = sd / std::sqrt(static_cast<double>(sorted.size()));
    }
    return out;
}

std::vector<std::pair<double, double>> qq_pairs(const std::vector<double>& a,
                                                const std::vector<double>& b,
                                                std::size_t n_quantiles) {
    if (a.empty() || b.empty()) throw std::invalid_argument("qq_pairs: empty sample");
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(n_quantiles);
    for (std::size_t k = 1; k <= n_quantiles; ++k) {
        const double level = static_cast<double>(k) / static_cast<double>(n_quantiles + 1);
        out.emplace_back(quantile_sorted(sa, level), quantile_sorted(sb, level));
    }
    return out;
}

}  // namespace amrisk
