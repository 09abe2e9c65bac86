#pragma once

// Sequence acceleration and limit extraction for t -> 0 asymptotics.

#include <span>
#include <vector>

namespace nlheat::extrap {

struct Estimate {
    double value = 0.0;
    double error = 0.0;  // spread between the last two usable estimates
};

/// Aitken delta-squared transform of a sequence; result has size n - 2.
std::vector<double> aitken(std::span<const double> seq);

/// Aitken applied to the sequence tail; error is the difference between the
/// last two transformed values.
Estimate aitken_limit(std::span<const double> seq);

/// Richardson extrapolation to t -> 0 for y(t) = c0 + sum_j c_j t^{e_j} with
/// known exponents e_j > 0. Uses the last exponents.size() + 1 samples (the
/// smallest t), solving the interpolation system exactly. Error estimate is
/// the change against the same fit one sample earlier.
Estimate richardson(std::span<const double> t, std::span<const double> y, std::span<const double> exponents);

/// Least-squares fit y ~ sum_k c_k basis_k(t). Returns coefficients.
struct LinearFit {
    std::vector<double> coef;
    std::vector<double> stderr_;  // standard errors from the residual variance
    double rms_residual = 0.0;
};
LinearFit least_squares(const std::vector<std::vector<double>>& columns, std::span<const double> y);

/// Wynn epsilon algorithm applied to partial sums; returns the accelerated limit.
Estimate wynn_epsilon(std::span<const double> partial_sums);

/// Least-squares slope of log|y| against log t.
double loglog_slope(std::span<const double> t, std::span<const double> y);

}  // namespace nlheat::extrap
