#pragma once

// Small-time expansions of H(t), their coefficients, and a harness that checks
// the limits numerically: subtract the known lower-order terms, normalize by
// the scale of the target term and extrapolate t -> 0.

#include <string>
#include <vector>

#include "nlheat/geometry.hpp"
#include "nlheat/heat.hpp"
#include "nlheat/levy.hpp"
#include "nlheat/stable_params.hpp"

namespace nlheat::expansion {

/// Exponent of t. Exact rationals when the exponent is n or 1/alpha with
/// rational alpha (denominator <= 1000); otherwise den = 0 and only value is
/// meaningful. Comparison uses the exact form when both sides have it, and
/// an absolute epsilon of 1e-12 otherwise.
struct Order {
    long num = 0;
    long den = 0;
    double value = 0.0;

    static Order integer(long n) { return {n, 1, static_cast<double>(n)}; }
    static Order real(double v);
    bool exact() const { return den != 0; }
    std::string str() const;
};
bool same_order(const Order& a, const Order& b);
bool order_less(const Order& a, const Order& b);

/// coefficient * t^order * log(1/t)^log_power.
struct Term {
    Order order;
    int log_power = 0;
    double coefficient = 0.0;
    double error = 0.0;  // truncation / quadrature error of the coefficient
    std::string provenance;
};

struct ExpansionSeries {
    std::vector<Term> terms;
    double t_max = 0.0;  // validity hint: the expansion is meaningful for t < t_max
    std::string description;

    double partial_sum(double t, std::size_t n_terms) const;
    double sum(double t) const { return partial_sum(t, terms.size()); }
};

/// Isotropic alpha-stable driver, alpha in (0, 1): t^k terms from the
/// perimeters Per_{nu^{(k alpha)}}, then the t^{1/alpha} term (with log(1/t)
/// when 1/alpha is an integer). depth counts the emitted terms.
ExpansionSeries stable_expansion(const geometry::Body& body, double alpha, int depth);

/// Exact one-dimensional series for an interval and the skewed (alpha, beta)
/// driver. alpha < 1: t^n terms, the t^{1/alpha} (or t^N log(1/t) plus t^N)
/// terms, and, if depth allows, the t^n terms beyond 1/alpha. alpha > 1:
/// mean_abs t^{1/alpha} followed by t^n terms.
ExpansionSeries prop_expansion_1d(const geometry::Body& interval, const stable::SkewedStableParams& p, int depth);

/// Finite Levy measure: H(t) = -sum_{k>=1} t^k/k! L^k g(0).
ExpansionSeries compound_poisson_expansion(const geometry::Body& body, const levy::LevyMeasure& nu, int depth);

/// Constant of the t^{1/alpha} term for isotropic drivers, 1/alpha not an
/// integer: pi^{(d-1)/2}/Gamma((d+1)/2) Per (int_0^1 r^d p_1 - sum a_n/(1 - n alpha)).
Term stable_power_term(const geometry::Body& body, double alpha);

/// sum_{n>=1} a_n / (1 - n alpha), truncated when |term| < 1e-14 |partial| or
/// at n = 500; the first omitted term is the error bound.
struct SeriesSum {
    double value = 0.0;
    double error = 0.0;
    int terms = 0;
};
SeriesSum a_series_sum(int d, double alpha);

/// M(t, r) = int_{S^{d-1}} (g(0) - g(r t^{1/alpha} u)) / (r t^{1/alpha}) sigma(du).
double m_omega_diag(const geometry::Body& body, double alpha, double t, double r);

/// Compound Poisson: partial sums of -sum_{k<=K} t^k/k! L^k g(0) against the
/// exact exponential series.
struct CompoundSeriesReport {
    double t = 0.0;
    double exact = 0.0;
    std::vector<double> partial;  // partial[k-1] = sum over 1..k
    std::vector<double> rel_error;
};
CompoundSeriesReport compound_poisson_partial_sums(const geometry::Body& body, const levy::LevyMeasure& nu, double t,
                                                   int K);

enum class Limit { FirstOrder, PerimeterSeries, LogTerm, PowerTerm, MeanAbs };
std::string limit_name(Limit l);
/// Accepts the names returned by limit_name. Throws ConfigError otherwise.
Limit parse_limit(const std::string& name);

enum class Verdict { Pass, Fail, Inconclusive };
std::string verdict_name(Verdict v);

enum class Engine { Quadrature, Exact1D };

struct VerifyRequest {
    Limit limit = Limit::FirstOrder;
    int n = 1;  // order for PerimeterSeries
    geometry::Body body = geometry::Body::interval(0.0, 1.0);
    heat::Driver driver = stable::IsotropicStableParams(0.5, 1);
    std::vector<double> t;
    Engine engine = Engine::Quadrature;
    double tolerance = 0.0;  // relative; 0 selects the per-limit default
    int corrections = 3;     // maximal number of correction terms in the fit
    double rel_tol = 1e-12;
    int threads = 0;
};

struct VerifyReport {
    std::string limit;
    std::vector<double> t;
    std::vector<double> H;
    std::vector<double> H_error;
    std::vector<std::vector<double>> partial_sums;  // per t, cumulative over the model terms
    std::vector<double> residual;                   // H minus the subtracted lower-order terms
    std::vector<double> normalized;                 // residual / scale of the target term
    std::vector<std::string> fit_basis;
    std::vector<double> fit_coef;
    double target = 0.0;
    double target_error = 0.0;
    double extrapolated = 0.0;
    double extrapolation_error = 0.0;
    double rel_error = 0.0;
    double tolerance = 0.0;
    double remainder_slope = 0.0;  // log-log slope of residual - target * scale
    Verdict verdict = Verdict::Inconclusive;
    std::string diagnostics;
};

double default_tolerance(Limit l);

VerifyReport verify_limit(const VerifyRequest& req);

}  // namespace nlheat::expansion
