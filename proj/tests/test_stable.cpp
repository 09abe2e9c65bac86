#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "nlheat/errors.hpp"
#include "nlheat/special.hpp"
#include "nlheat/stable.hpp"

using namespace nlheat;
using namespace nlheat::stable;
namespace bm = boost::math;

namespace {

// (1/pi) int_0^inf cos(xi x) exp(-xi^alpha) dxi, independent of the library's contour rotation
double symmetric_density_ooura(double alpha, double x) {
    if (x == 0.0) return bm::tgamma(1 + 1 / alpha) / M_PI;  // not oscillatory: int_0^inf exp(-xi^alpha) dxi
    static bm::quadrature::ooura_fourier_cos<double> ooura(1e-13);
    const auto [v, err] = ooura.integrate([&](double xi) { return std::exp(-std::pow(xi, alpha)); }, x);
    return v / M_PI;
}

// KS distance at ~2000 order statistics; the empirical CDF is exact there
double ks_statistic(std::vector<double> s, const std::function<double(double)>& F) {
    std::sort(s.begin(), s.end());
    const double n = double(s.size());
    double D = 0;
    const std::size_t step = std::max<std::size_t>(1, s.size() / 2000);
    for (std::size_t i = step / 2; i < s.size(); i += step) {
        const double f = F(s[i]);
        D = std::max({D, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    return D;
}

}  // namespace

TEST_CASE("series coefficients") {
    // a_n vanishes when n alpha / 2 is an integer
    CHECK(coeff_a(4, 1, 0.5) == 0.0);
    CHECK(coeff_a(2, 3, 1.0) == 0.0);
    CHECK(coeff_a(1, 1, 0.5) == doctest::Approx(special::stable_constant(1, 0.5)).epsilon(1e-13));
    // n = 2, d = 2, alpha = 0.3 against an explicit Gamma product for -A_{2,-0.6}/2
    const double A = std::pow(2.0, 0.6) * bm::tgamma(1.3) / (M_PI * std::abs(bm::tgamma(-0.3)));
    CHECK(coeff_a(2, 2, 0.3) == doctest::Approx(-A / 2).epsilon(1e-13));
    for (int d : {1, 2, 3})
        for (double alpha : {0.2, 0.35, 0.5, 0.7, 0.9})
            for (int n = 1; n <= 12; ++n) {
                const double na2 = n * alpha / 2;
                if (std::abs(na2 - std::round(na2)) < 1e-12)
                    CHECK(coeff_a(n, d, alpha) == 0.0);
                else
                    CHECK(coeff_a(n, d, alpha) == doctest::Approx(coeff_a_identity(n, d, alpha)).epsilon(1e-11));
            }

    // d_1 = (2/pi^{3/2}) Gamma(1.5) sin(pi/4) in the normalization b_n = (-1)^{n-1}/pi Gamma(n alpha+1)/n! sin(pi n alpha rho)
    const double b1 = bm::tgamma(1.5) * std::sin(M_PI / 4) / M_PI;
    CHECK(coeff_b(1, SkewedStableParams(0.5, 0.0)) == doctest::Approx(b1).epsilon(1e-14));
    CHECK(coeff_d(1, 0.5, 0.0) == doctest::Approx(2 * b1).epsilon(1e-14));
    // symmetric case: d_n = 2 b_n; the isotropic a_n agree with b_n
    for (double alpha : {0.3, 0.5, 0.8})
        for (int n = 1; n <= 10; ++n) {
            const SkewedStableParams p(alpha, 0.0);
            CHECK(coeff_d(n, alpha, 0.0) == doctest::Approx(2 * coeff_b(n, p)).epsilon(1e-12));
            CHECK(coeff_b(n, p) == doctest::Approx(coeff_a(n, 1, alpha)).epsilon(1e-10));
        }
    // d_n = b_n(beta) + b_n(-beta) for skewed laws on both sides of alpha = 1
    for (double alpha : {0.4, 0.7, 1.3, 1.7})
        for (double beta : {-0.6, 0.3, 0.9})
            for (int n = 1; n <= 8; ++n) {
                const SkewedStableParams p(alpha, beta);
                const double bp = coeff_b(n, p), bm_ = coeff_b(n, p.reflected());
                CHECK(std::abs(coeff_d(n, alpha, beta) - (bp + bm_)) <= 1e-11 * (std::abs(bp) + std::abs(bm_)));
            }
    // totally skewed: b_n = 0 when n alpha rho = n alpha is an integer
    CHECK(coeff_b(2, SkewedStableParams(0.5, 1.0)) == 0.0);
}

TEST_CASE("isotropic series vs Fourier inversion") {
    const IsotropicStableParams p(0.5, 1);
    const auto s = density_series_isotropic(p, 5.0);
    CHECK(s.converged);
    CHECK(s.value == doctest::Approx(density_fourier(p, 5.0).value).epsilon(1e-8));
    CHECK(s.value == doctest::Approx(symmetric_density_ooura(0.5, 5.0)).epsilon(1e-8));
    // leading term dominates at large |x|
    CHECK(density_series_isotropic(p, 1e6).value / (coeff_a(1, 1, 0.5) * std::pow(1e6, -1.5)) ==
          doctest::Approx(1.0).epsilon(1e-3));
    const IsotropicStableParams p2(0.5, 2);
    CHECK(density_fourier(p2, 3.0).value == doctest::Approx(density_series_isotropic(p2, 3.0).value).epsilon(1e-6));

    for (int d : {1, 2, 3})
        for (double alpha : {0.3, 0.5, 0.8}) {
            const IsotropicStableParams q(alpha, d);
            for (double r = 1.0; r <= 20.0; r += 0.5) {
                const double a = density_series_isotropic(q, r).value, b = density_fourier(q, r).value;
                CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
            }
        }
}

TEST_CASE("one-dimensional series") {
    const SkewedStableParams sym(0.5, 0.0);
    CHECK(density_series_1d(sym, 10.0).value ==
          doctest::Approx(density_series_isotropic(IsotropicStableParams(0.5, 1), 10.0).value).epsilon(1e-13));
    CHECK(density_series_1d(sym, -3.0).value == doctest::Approx(density_series_1d(sym, 3.0).value).epsilon(1e-14));

    // alpha > 1: N-term asymptotic sum inside an O(x^{-(N+1) alpha - 1}) envelope
    const SkewedStableParams p(1.5, 0.5);
    double C = 0;
    for (double x : {8.0, 12.0, 20.0, 35.0, 50.0}) {
        const double a = density_series_1d(p, x, 3).value, f = density_fourier(p, x).value;
        C = std::max(C, std::abs(a - f) * std::pow(x, 4 * 1.5 + 1));
    }
    CHECK(C < 10.0);
    for (double x : {5.0, 50.0})
        CHECK(std::abs(density_series_1d(p, x, 3).value - density_fourier(p, x).value) <= C * std::pow(x, -7.0) * 1.0001);

    // one-sided support for beta = 1, alpha < 1
    const SkewedStableParams one(0.5, 1.0);
    CHECK(density_series_1d(one, -2.0).value == doctest::Approx(0.0).scale(1e-300));
    CHECK(std::abs(density_fourier(one, -2.0).value) < 1e-10);
    CHECK_THROWS_AS(density_series_1d(SkewedStableParams(1.5, 1.0), 5.0, 3), UnsupportedError);
    CHECK_THROWS_AS(density_series_1d(sym, 0.0), DomainError);
}

TEST_CASE("Fourier inversion: closed forms and an independent oracle") {
    // Cauchy (alpha = 1) at the origin and off it
    CHECK(density_fourier(IsotropicStableParams(1.0, 1), 0.0).value == doctest::Approx(1 / M_PI).epsilon(1e-10));
    CHECK(density_fourier(IsotropicStableParams(1.0, 1), 2.0).value == doctest::Approx(1 / (5 * M_PI)).epsilon(1e-10));
    // Gaussian limit is excluded, but alpha = 1 in d = 3: c / (pi^2 (1 + r^2)^2)
    CHECK(density_fourier(IsotropicStableParams(1.0, 3), 0.7).value ==
          doctest::Approx(1.0 / (M_PI * M_PI * std::pow(1 + 0.49, 2))).epsilon(1e-9));
    // Levy law: psi = |xi|^{1/2} e^{-i pi sgn/4} is the classical Levy with scale 1/2
    const double levy1 = std::exp(-0.25) / (2 * std::sqrt(M_PI));
    CHECK(density_fourier(SkewedStableParams(0.5, 1.0), 1.0).value == doctest::Approx(levy1).epsilon(1e-10));
    CHECK(density(SkewedStableParams(0.5, 1.0), 1.0) == doctest::Approx(levy1).epsilon(1e-10));
    for (double alpha : {0.4, 0.9, 1.3, 1.8})
        for (double x : {0.0, 0.3, 1.0, 4.0}) {
            const double ref = symmetric_density_ooura(alpha, x);
            CHECK(density_fourier(IsotropicStableParams(alpha, 1), x).value == doctest::Approx(ref).epsilon(1e-8));
            CHECK(density_fourier(SkewedStableParams(alpha, 0.0), x).value == doctest::Approx(ref).epsilon(1e-8));
        }
}

TEST_CASE("normalization and positivity") {
    auto gk = [](auto f, double a, double b) { return bm::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-12); };
    // finite part by quadrature, tails from the leading series terms
    for (double alpha : {0.6, 1.5}) {
        for (double beta : {0.0, 0.4}) {
            const SkewedStableParams p(alpha, beta);
            const double X = 200.0;
            double mass = gk([&](double x) { return density_fourier(p, x).value; }, -X, 0.0) +
                          gk([&](double x) { return density_fourier(p, x).value; }, 0.0, X);
            // int_X^inf sum b_n x^{-n alpha-1} = sum b_n X^{-n alpha}/(n alpha)
            for (int n = 1; n <= 4; ++n)
                mass += (coeff_b(n, p) + coeff_b(n, p.reflected())) * std::pow(X, -n * alpha) / (n * alpha);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    {  // d = 2 radial: 2 pi int r p(r) dr, alpha = 1.2
        const IsotropicStableParams p(1.2, 2);
        const double X = 100.0;
        double mass = 2 * M_PI * gk([&](double r) { return r * density_fourier(p, r).value; }, 0.0, X);
        for (int n = 1; n <= 3; ++n) mass += 2 * M_PI * coeff_a(n, 2, 1.2) * std::pow(X, -n * 1.2) / (n * 1.2);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
    for (double alpha : {0.3, 0.7, 1.3, 1.9})
        for (double beta : {-1.0, 0.0, 0.5})
            for (double x : {-30.0, -3.0, -0.5, 0.1, 2.0, 40.0}) {
                if (alpha > 1 && std::abs(beta) == 1.0) continue;
                CHECK(density(SkewedStableParams(alpha, beta), x) >= -1e-10);
            }
}

TEST_CASE("sampling: KS test, support and self-similarity") {
    std::mt19937_64 rng(2024);
    {
        const auto s = sample(SkewedStableParams(0.5, 0.0), 1.0, rng, 1000000);
        const double D = ks_statistic(s, [](double x) { return cdf_symmetric(0.5, x); });
        CHECK(D < 1.628 / std::sqrt(1e6));
    }
    for (auto [a, b] : {std::pair{0.7, 0.6}, std::pair{1.5, 0.5}, std::pair{1.3, -1.0}}) {
        const SkewedStableParams p(a, b);
        const long n = 200000;
        const auto s = sample(p, 1.0, rng, n);
        CHECK(ks_statistic(s, [&](double x) { return cdf(p, x); }) < 1.628 / std::sqrt(double(n)));
    }
    {  // isotropic d = 1 sampler via subordination
        const auto s = sample(IsotropicStableParams(1.2, 1), 1.0, rng, 200000);
        std::vector<double> v;
        for (const auto& pt : s) v.push_back(pt[0]);
        CHECK(ks_statistic(v, [](double x) { return cdf_symmetric(1.2, x); }) < 1.628 / std::sqrt(2e5));
    }
    {  // d = 2: the law of |X| against the radial density
        const IsotropicStableParams p(0.8, 2);
        const auto s = sample(p, 1.0, rng, 100000);
        std::vector<double> r;
        for (const auto& pt : s) r.push_back(std::hypot(pt[0], pt[1]));
        std::sort(r.begin(), r.end());
        for (double q : {0.25, 0.5, 0.75}) {
            const double rq = r[std::size_t(q * r.size())];
            const double F = bm::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double u) { return 2 * M_PI * u * density(p, u); }, 0.0, rq, 15, 1e-10);
            CHECK(std::abs(F - q) < 4 * std::sqrt(q * (1 - q) / r.size()));
        }
    }
    {
        const auto s = sample(SkewedStableParams(0.5, 1.0), 1.0, rng, 100000);
        CHECK(*std::min_element(s.begin(), s.end()) >= 0.0);
    }
    {  // X_t has the law of t^{1/alpha} X_1: same seed, exact scaling
        std::mt19937_64 r1(9), r2(9);
        const SkewedStableParams p(0.7, 0.3);
        const auto a = sample(p, 1.0, r1, 1000), b = sample(p, 0.2, r2, 1000);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(std::pow(0.2, 1 / 0.7) * a[i]).epsilon(1e-12));
        // and in distribution: median of |X| at independent draws
        std::mt19937_64 r3(10), r4(11);
        auto med = [](std::vector<double> v) {
            for (auto& x : v) x = std::abs(x);
            std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
            return v[v.size() / 2];
        };
        const double m1 = med(sample(p, 1.0, r3, 200000)), m2 = med(sample(p, 0.2, r4, 200000));
        CHECK(m2 / m1 == doctest::Approx(std::pow(0.2, 1 / 0.7)).epsilon(0.02));
    }
    const auto zero = sample(SkewedStableParams(0.5, 0.0), 0.0, rng, 3);
    CHECK(zero == std::vector<double>(3, 0.0));
}

TEST_CASE("mean absolute value") {
    CHECK(mean_abs(SkewedStableParams(1.5, 0.0)) == doctest::Approx(2 / M_PI * bm::tgamma(1.0 / 3)).epsilon(1e-13));
    for (double beta : {0.0, 0.3, 0.5, -0.8}) {
        const SkewedStableParams p(1.5, beta);
        CHECK(mean_abs_quadrature(p) == doctest::Approx(mean_abs(p)).epsilon(1e-5));
        CHECK(mean_abs(p) == doctest::Approx(mean_abs(p.reflected())).epsilon(1e-14));
    }
    CHECK(mean_abs_quadrature(SkewedStableParams(1.8, 0.2)) == doctest::Approx(mean_abs(SkewedStableParams(1.8, 0.2))).epsilon(1e-5));
    CHECK_THROWS_AS(mean_abs(SkewedStableParams(0.9, 0.0)), DomainError);
}

TEST_CASE("radial moment integral") {
    auto gk = [](auto f) { return bm::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 20, 1e-12); };
    for (int d : {1, 2}) {
        const IsotropicStableParams p(0.5, d);
        const double v = radial_moment_integral(p);
        CHECK(v > 0);
        // independent evaluator: quadrature over the inversion alone
        const double ref = gk([&](double r) { return std::pow(r, d) * density_fourier(p, r).value; });
        CHECK(v == doctest::Approx(ref).epsilon(1e-6));
    }
    {
        const IsotropicStableParams p(0.9, 1);
        const double v = radial_moment_integral(p);
        CHECK(v > 0);
        CHECK(v < density_fourier(p, 0.0).value / 2);  // ||p_1||_inf / (d + 1), maximum at the origin
    }
    CHECK_THROWS_AS(radial_moment_integral(IsotropicStableParams(1.2, 1)), DomainError);
}
