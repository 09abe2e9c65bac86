#pragma once

// Heat content H(t) = int (g(0) - g(y)) p_t(dy) and H_Omega(t) = |Omega| - H(t);
// nonlocal perimeters Per_nu(Omega) = int (g(0) - g(y)) nu(dy).

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nlheat/geometry.hpp"
#include "nlheat/levy.hpp"
#include "nlheat/stable_params.hpp"

namespace nlheat::heat {

struct PerimeterResult {
    double value = 0.0;
    double error = 0.0;
    bool divergent = false;  // alpha >= 1: the integral is infinite
    /// For isotropic stable nu: Per_{(alpha)}(Omega) = value / A_{d,-alpha}.
    double alpha_perimeter = 0.0;
    std::string method;
};

PerimeterResult nonlocal_perimeter(const geometry::Body& body, const levy::LevyMeasure& nu, double tol = 1e-10);

/// Per_{nu^{(s)}}(Omega) for the isotropic s-stable measure, s < 1.
double stable_perimeter(const geometry::Body& body, double s);

using Driver = std::variant<stable::IsotropicStableParams, stable::SkewedStableParams, levy::LevyMeasure>;

enum class Method { Quadrature, MonteCarlo, Exact1D };
std::string method_name(Method m);

struct HeatContentRequest {
    geometry::Body body;
    Driver driver;
    std::vector<double> t;  // strictly positive, ascending
    Method method = Method::Quadrature;
    double rel_tol = 1e-12;
    long mc_samples = 1000000;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: NONLOCAL_HEAT_THREADS or hardware concurrency
};

struct EvalReport {
    std::vector<double> t;
    std::vector<double> H;
    std::vector<double> H_omega;  // |Omega| - H
    std::vector<double> error;    // quadrature error estimate or MC standard error
    Method method = Method::Quadrature;
};

/// Radial-spherical quadrature of (g(0) - g(y)) p_t(y).
EvalReport heat_content_quadrature(const HeatContentRequest& req);
/// E[g(0) - g(X_t)] by sampling.
EvalReport heat_content_mc(const HeatContentRequest& req);
/// int (|Omega| ^ t^{1/alpha} |x|) p_1(x) dx for an interval.
double heat_content_exact_1d(const geometry::Body& interval, const stable::SkewedStableParams& p, double t,
                             double rel_tol = 1e-13);
double heat_content_exact_1d(const geometry::Body& interval, double alpha, double t, double rel_tol = 1e-13);

/// Dispatch on req.method.
EvalReport heat_content(const HeatContentRequest& req);

}  // namespace nlheat::heat
