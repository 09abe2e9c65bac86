#pragma once

// Special functions used throughout: Gamma (Lanczos, with reflection),
// regularized incomplete beta, sphere/ball measures and the fractional
// Laplacian normalizing constant.

#include <vector>

namespace nlheat::special {

inline constexpr double pi = 3.14159265358979323846;

/// Gamma function for any non-pole real argument.
double gamma(double x);

/// log|Gamma(x)|, x not a non-positive integer.
double log_gamma(double x);

/// Sign of Gamma(x): +1 or -1.
double gamma_sign(double x);

/// 1/Gamma(x), returning 0 at the poles.
double rgamma(double x);

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double ibeta(double a, double b, double x);

/// Surface measure of the unit sphere S^{d-1} in R^d (2 for d = 1).
double sphere_area(int d);

/// Lebesgue measure of the unit ball in R^d.
double ball_volume(int d);

/// A_{d,-s} = 2^s Gamma((d+s)/2) / (pi^{d/2} |Gamma(-s/2)|), the density
/// constant of the isotropic s-stable Levy measure. s in (0, 2).
double stable_constant(int d, double s);

/// Signed variant 2^s Gamma((d+s)/2) / (pi^{d/2} (-Gamma(-s/2))), defined for
/// every s with s/2 not a non-negative integer.
double stable_constant_signed(int d, double s);

/// Volume of the intersection of two balls of radius r in R^d whose centres
/// are at distance dist.
double ball_lens_volume(int d, double r, double dist);

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace nlheat::special
