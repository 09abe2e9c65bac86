#pragma once

// Stable densities: convergent/asymptotic series, Fourier inversion along a
// rotated contour, exact sampling, and the moment functionals used by the
// expansion constants.

#include <cstdint>
#include <random>
#include <vector>

#include "nlheat/stable_params.hpp"

namespace nlheat::stable {

/// a_n for the isotropic series p_1(x) = sum a_n |x|^{-n alpha - d}.
double coeff_a(int n, int d, double alpha);
/// ((-1)^{n-1}/n!) A_{d,-n alpha} with the signed Gamma(-n alpha/2); equal to
/// coeff_a whenever n alpha / 2 is not an integer.
double coeff_a_identity(int n, int d, double alpha);
/// b_n of the one-sided series p_1(x) = sum b_n x^{-n alpha - 1}, x > 0.
double coeff_b(int n, const SkewedStableParams& p);
/// d_n = b_n(rho) + b_n(1 - rho): coefficient of the symmetrized series
/// p_1(x) + p_1(-x) = sum d_n x^{-n alpha - 1}.
double coeff_d(int n, double alpha, double beta);

struct SeriesValue {
    double value = 0.0;
    double achieved_tol = 0.0;  // estimated relative error (truncation + cancellation)
    int terms = 0;
    bool converged = false;
};

/// Convergent series in |x|, alpha < 1. Throws NumericError (with the partial
/// sum) when n_max terms do not reach tol.
SeriesValue density_series_isotropic(const IsotropicStableParams& p, double r, double tol = 1e-14,
                                     int n_max = 200);

/// One-sided series at x != 0 (reflection for x < 0). alpha < 1: convergent,
/// N ignored. alpha > 1: N-term asymptotic sum; N = 0 selects the
/// smallest-term truncation. achieved_tol then carries the first omitted term
/// relative to the sum.
SeriesValue density_series_1d(const SkewedStableParams& p, double x, int N = 0, double tol = 1e-14,
                              int n_max = 200);

struct InversionValue {
    double value = 0.0;
    double error = 0.0;
};

/// Fourier inversion. tol is a relative tolerance for the contour integrals.
InversionValue density_fourier(const IsotropicStableParams& p, double r, double tol = 1e-11);
InversionValue density_fourier(const SkewedStableParams& p, double x, double tol = 1e-11);

/// Best available value: the series when it converges without cancellation,
/// otherwise inversion.
double density(const IsotropicStableParams& p, double r);
double density(const SkewedStableParams& p, double x);

/// Distribution function of the 1-D law (isotropic d = 1 or skewed).
double cdf(const SkewedStableParams& p, double x);
double cdf_symmetric(double alpha, double x);

/// X_t samples. Isotropic: sqrt(2 S) Z with S positive (alpha/2)-stable.
/// Skewed: Chambers-Mallows-Stuck in the same parameterization as the symbol.
std::vector<std::vector<double>> sample(const IsotropicStableParams& p, double t, std::mt19937_64& rng, long n);
std::vector<double> sample(const SkewedStableParams& p, double t, std::mt19937_64& rng, long n);
double sample_one(const SkewedStableParams& p, std::mt19937_64& rng);
/// Positive alpha-stable variable with E exp(-l S) = exp(-l^alpha), alpha < 1.
double sample_positive(double alpha, std::mt19937_64& rng);

/// E|X_1|, alpha > 1.
double mean_abs(const SkewedStableParams& p);
/// Direct quadrature of |x| p_1(x); cross-check for mean_abs.
double mean_abs_quadrature(const SkewedStableParams& p);

/// int_0^1 r^d p_1(r e_d) dr, alpha < 1.
double radial_moment_integral(const IsotropicStableParams& p);

}  // namespace nlheat::stable
