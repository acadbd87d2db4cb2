#pragma once

#include <stdexcept>

namespace amrisk {

enum class OptionKind { Call, Put };
enum class ExerciseStyle { European, American };

struct OptionSpec {
    double strike = 0.0;
    double maturity = 0.0;  // years
    OptionKind kind = OptionKind::Call;
    ExerciseStyle style = ExerciseStyle::European;

    void validate() const {
        if (!(strike > 0.0)) throw std::invalid_argument("option spec: strike must be positive");
        if (!(maturity > 0.0)) throw std::invalid_argument("option spec: maturity must be positive");
    }
};

/// Standard normal CDF.
double norm_cdf(double x);

/// Black-Scholes closed form. sigma = 0 returns the discounted intrinsic.
double bs_price(double sigma, double r, double spot, const OptionSpec& spec);

/// Thrown when an observed price sits outside the arbitrage bounds.
class ImpliedVolDomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inverts bs_price by safeguarded bracketing on sigma in [1e-6, 6].
/// Residual tolerance 1e-10 in price, at most 200 iterations.
double implied_vol(double price, double r, double spot, const OptionSpec& spec);

}  // namespace amrisk
