#pragma once

// P_t f, L f, L^k f, Taylor remainders of t -> P_t f, and the exact
// compound-Poisson exponential.

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <variant>
#include <vector>

#include "nlheat/levy.hpp"
#include "nlheat/stable_params.hpp"

namespace nlheat::semigroup {

using Point = std::vector<double>;

struct HolderFunction {
    std::function<double(const Point&)> f;
    double beta = 1.0;                                           // Holder exponent in (0, 1]
    double sup_norm = std::numeric_limits<double>::quiet_NaN();  // optional
    double holder_const = std::numeric_limits<double>::quiet_NaN();
    /// 1-D points where f is not smooth; quadrature splits there.
    std::vector<double> kinks;
    /// f vanishes outside this ball centred at the origin.
    double support_radius = std::numeric_limits<double>::infinity();

    double operator()(const Point& x) const { return f(x); }
};

/// f = g_Omega for Omega = (a, b): (L - |x|)^+, beta = 1.
HolderFunction interval_covariance(double length);

struct HolderCheck {
    double max_ratio;  // max |f(x) - f(y)| / |x - y|^beta over sampled pairs
    double sup_abs;
};
/// Samples pairs with |x - y| <= 1 in the cube [-radius, radius]^d.
HolderCheck estimate_holder(const HolderFunction& f, int d, double radius, long pairs, std::uint64_t seed);

struct Value {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
};

/// L f(x) = int (f(x + y) - f(x)) nu(dy).
Value generator_apply(const HolderFunction& f, const levy::LevyMeasure& nu, const Point& x, double tol = 1e-10);

/// L^k f(x). Finite atomic measures: exact via (nu - |nu| delta_0)^{*k}.
/// Stable measures: nested quadrature with a memoizing point cache.
Value generator_power_at(const HolderFunction& f, const levy::LevyMeasure& nu, int k, const Point& x,
                         double tol = 1e-8);

/// Signed atomic measure, keyed by location.
struct AtomicMeasure {
    std::map<Point, double> atoms;
    double pruned_mass = 0.0;

    double apply(const HolderFunction& f, const Point& x) const;
    double total_variation() const;
};

/// Exact convolution with pruning: smallest atoms are dropped while their
/// cumulative mass stays below prune_mass. Throws ResourceError past max_atoms.
AtomicMeasure convolve(const AtomicMeasure& a, const AtomicMeasure& b, double prune_mass = 0.0,
                       std::size_t max_atoms = 2000000);
AtomicMeasure from_levy(const levy::LevyMeasure& nu);

/// e^{-t |nu|} sum_n t^n/n! (nu^{*n} * f)(x); N from the Poisson tail.
struct PoissonValue {
    double value;
    int terms;
    double tail_bound;  // bound on the omitted mass times sup|f|, plus pruned mass
};
PoissonValue compound_poisson_apply(const levy::LevyMeasure& nu, const HolderFunction& f, double t, const Point& x,
                                    double series_tol = 1e-14);

/// Driver of the semigroup for Monte Carlo.
using Driver = std::variant<stable::IsotropicStableParams, stable::SkewedStableParams, levy::LevyMeasure>;

struct McValue {
    double value;
    double stderr_;
};
McValue semigroup_apply_mc(const HolderFunction& f, const Driver& driver, double t, const Point& x, long n,
                           std::uint64_t seed);

/// P_t f(x) by quadrature against the 1-D stable density.
Value semigroup_apply_quadrature(const HolderFunction& f, const Driver& driver, double t, double x,
                                 double tol = 1e-12);

struct TaylorReport {
    std::vector<double> t;
    std::vector<double> remainder;  // t^{-n} (P_t f - sum_{k<n} t^k/k! L^k f)
    std::vector<double> error;
    double target = 0.0;            // L^n f(x) / n!
    double extrapolated = 0.0;
    double extrapolation_error = 0.0;
};

/// t-grid must be positive and decreasing or increasing; values are reported in the given order.
TaylorReport taylor_remainder(const HolderFunction& f, const levy::LevyMeasure& nu, const Driver& driver,
                              const std::vector<double>& t_grid, int n, const Point& x);

}  // namespace nlheat::semigroup
