#include "nlheat/stable.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "nlheat/errors.hpp"
#include "nlheat/quadrature.hpp"
#include "nlheat/special.hpp"

namespace nlheat::stable {

using special::pi;
using cplx = std::complex<double>;

namespace {

constexpr double tiny = 1e-300;

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

double parity(int n) { return (n % 2 == 1) ? 1.0 : -1.0; }  // (-1)^{n-1}

// Series sum_{n>=1} c_n r^{-n alpha - e}, with c_n = s_n exp(l_n) supplied by
// coef(n, &sign, &logabs) (sign 0 for a vanishing coefficient).
// alpha < 1: convergent. alpha > 1: asymptotic; N terms, or smallest term if N = 0.
template <class Coef>
SeriesValue sum_series(Coef coef, double alpha, double e, double r, double tol, int n_max, bool asymptotic, int N) {
    SeriesValue out;
    const double lr = std::log(r);
    double sum = 0.0, abs_sum = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    bool all_zero = true;
    const int limit = (asymptotic && N > 0) ? N : n_max;
    double omitted = 0.0;
    int n = 1;
    for (; n <= limit; ++n) {
        double sign = 0.0, logabs = 0.0;
        coef(n, sign, logabs);
        if (sign == 0.0) continue;
        all_zero = false;
        const double mag = std::exp(logabs - (n * alpha + e) * lr);
        if (asymptotic && N == 0 && mag > prev_mag) {
            omitted = mag;
            out.converged = true;
            break;
        }
        sum += sign * mag;
        abs_sum += mag;
        out.terms = n;
        if (!asymptotic && mag < prev_mag && mag <= tol * std::abs(sum)) {
            omitted = mag;
            out.converged = true;
            break;
        }
        if (asymptotic && N == 0 && mag <= tol * std::abs(sum)) {
            omitted = mag;
            out.converged = true;
            break;
        }
        prev_mag = mag;
    }
    if (all_zero) {
        out.value = 0.0;
        out.achieved_tol = 0.0;
        out.converged = true;
        return out;
    }
    if (asymptotic && N > 0) {
        // first omitted nonzero term
        for (int m = N + 1; m <= N + 8; ++m) {
            double sign = 0.0, logabs = 0.0;
            coef(m, sign, logabs);
            if (sign == 0.0) continue;
            omitted = std::exp(logabs - (m * alpha + e) * lr);
            break;
        }
        out.converged = true;
    }
    if (!out.converged) omitted = prev_mag;
    out.value = sum;
    const double scale = std::max(std::abs(sum), tiny);
    out.achieved_tol = (omitted + 4e-16 * abs_sum) / scale;
    return out;
}

void isotropic_coef(int n, int d, double alpha, double& sign, double& logabs) {
    const double half = 0.5 * n * alpha;
    if (near_integer(half)) {
        sign = 0.0;
        return;
    }
    const double s = std::sin(pi * half);
    sign = parity(n) * (s > 0 ? 1.0 : -1.0);
    logabs = -(1.0 + 0.5 * d) * std::log(pi) - std::lgamma(n + 1.0) + n * alpha * std::log(2.0) +
             std::lgamma(half + 1.0) + std::lgamma(0.5 * (n * alpha + d)) + std::log(std::abs(s));
}

// b_n with rho given directly.
void skewed_coef(int n, double alpha, double rho, double& sign, double& logabs) {
    const double arg = n * alpha * rho;
    if (near_integer(arg)) {
        sign = 0.0;
        return;
    }
    const double s = std::sin(pi * arg);
    sign = parity(n) * (s > 0 ? 1.0 : -1.0);
    logabs = -std::log(pi) + std::lgamma(n * alpha + 1.0) - std::lgamma(n + 1.0) + std::log(std::abs(s));
}

quad::Options inversion_opts(double tol) {
    quad::Options o;
    o.abs_tol = tiny;
    o.rel_tol = tol;
    o.max_intervals = 20000;
    return o;
}

// 1-D law with symbol |xi|^alpha exp(-i thc sgn xi), |thc| < pi/2; x >= 0.
// p(x) = (1/pi) Re int_0^inf exp(-i xi x - psi(xi)) dxi on the ray xi = u e^{-i phi}.
InversionValue fourier_1d(double alpha, double thc, double x, double tol) {
    if (x < 0.0) return fourier_1d(alpha, -thc, -x, tol);
    const double phi = std::min(0.5 * pi, (0.5 * pi - thc) / (2.0 * alpha));
    const cplx rot = std::polar(1.0, -phi);
    const cplx arot = std::polar(1.0, -(alpha * phi + thc));
    const cplx ix = cplx(0.0, x) * rot;
    auto f = [&](double u) { return std::exp(-u * ix - std::pow(u, alpha) * arot); };
    auto res = quad::integrate_half_line<cplx>(f, 1.0 / (1.0 + x), inversion_opts(tol));
    InversionValue out{(rot * res.value).real() / pi, res.error / pi};
    if (!res.converged)
        throw NumericError("density_fourier: contour integral did not converge", out.value, out.error);
    return out;
}

// F(x) - F(0) = (1/pi) Re int_0^inf e^{-psi} (1 - e^{-i xi x}) / (i xi) dxi, x >= 0.
double cdf_1d(double alpha, double thc, double x) {
    const double rho = 0.5 + thc / (pi * alpha);
    if (x < 0.0) return 1.0 - cdf_1d(alpha, -thc, -x);
    if (x == 0.0) return 1.0 - rho;
    const double phi = std::min(0.5 * pi, (0.5 * pi - thc) / (2.0 * alpha));
    const cplx rot = std::polar(1.0, -phi);
    const cplx arot = std::polar(1.0, -(alpha * phi + thc));
    auto f = [&](double u) {
        const cplx xi = u * rot;
        const cplx z = cplx(0.0, 1.0) * xi * x;
        cplx h;
        if (std::abs(z) < 1e-4)
            h = x * (1.0 - 0.5 * z + z * z / 6.0 - z * z * z / 24.0);
        else
            h = (1.0 - std::exp(-z)) / (cplx(0.0, 1.0) * xi);
        return std::exp(-std::pow(u, alpha) * arot) * h;
    };
    auto opt = inversion_opts(1e-12);
    opt.abs_tol = 1e-15;
    auto res = quad::integrate_half_line<cplx>(f, 1.0 / (1.0 + x), opt);
    if (!res.converged) throw NumericError("cdf: contour integral did not converge", res.value.real(), res.error);
    return 1.0 - rho + (rot * res.value).real() / pi;
}

// Isotropic, d >= 2:
// p(r) = 2 (2 pi)^{-d} |S^{d-2}| int_0^{pi/2} sin^{d-2} t Re C_{d-1}(r cos t) dt,
// C_k(s) = int_0^inf rho^k e^{-rho^alpha} e^{-i rho s} d rho, rotated by e^{-i phi}.
InversionValue fourier_radial(double alpha, int d, double r, double tol) {
    const int k = d - 1;
    const double phi = std::min(0.5 * pi, 0.25 * pi / alpha);
    const cplx rot = std::polar(1.0, -phi);
    const cplx arot = std::polar(1.0, -alpha * phi);
    const cplx rotk = std::polar(1.0, -phi * (k + 1));
    double inner_err = 0.0;
    bool ok = true;
    auto C = [&](double s) {
        const cplx is = cplx(0.0, s) * rot;
        auto f = [&](double u) { return std::pow(u, k) * std::exp(-u * is - std::pow(u, alpha) * arot); };
        auto res = quad::integrate_half_line<cplx>(f, 1.0 / (1.0 + s), inversion_opts(0.1 * tol));
        ok = ok && res.converged;
        inner_err = std::max(inner_err, res.error);
        return (rotk * res.value).real();
    };
    auto g = [&](double t) { return std::pow(std::sin(t), d - 2) * C(r * std::cos(t)); };
    auto opt = inversion_opts(tol);
    auto outer = quad::integrate(g, 0.0, 0.5 * pi, opt);
    const double pref = 2.0 * std::pow(2.0 * pi, -d) * special::sphere_area(d - 1);
    InversionValue out{pref * outer.value, pref * (outer.error + 0.5 * pi * inner_err)};
    if (!ok || !outer.converged)
        throw NumericError("density_fourier: radial inversion did not converge", out.value, out.error);
    return out;
}

// p_1'(x) of the symmetric 1-D law, x >= 0, on the same rotated ray as fourier_1d.
InversionValue deriv_1d(double alpha, double x, double tol) {
    const double phi = std::min(0.5 * pi, 0.25 * pi / alpha);
    const cplx rot = std::polar(1.0, -phi);
    const cplx arot = std::polar(1.0, -alpha * phi);
    const cplx ix = cplx(0.0, x) * rot;
    auto f = [&](double u) { return u * std::exp(-u * ix - std::pow(u, alpha) * arot); };
    auto res = quad::integrate_half_line<cplx>(f, 1.0 / (1.0 + x), inversion_opts(tol));
    const cplx pref = cplx(0.0, -1.0) * rot * rot;
    InversionValue out{(pref * res.value).real() / pi, res.error / pi};
    if (!res.converged)
        throw NumericError("density_fourier: derivative contour integral did not converge", out.value, out.error);
    return out;
}

// p_d(0) = |S^{d-1}| Gamma(d/alpha) / (alpha (2 pi)^d)
double radial_at_zero(double alpha, int d) {
    return special::sphere_area(d) * special::gamma(d / alpha) / (alpha * std::pow(2.0 * pi, d));
}

// d = 2 and 3 reduce to p_1' without cancellation:
//   p_3(r) = -p_1'(r) / (2 pi r),   p_2(r) = -(1/pi) int_0^inf p_1'(r cosh u) du (inverse Abel).
InversionValue radial_from_1d(double alpha, int d, double r, double tol) {
    if (r == 0.0) return {radial_at_zero(alpha, d), 0.0};
    if (d == 3) {
        const auto v = deriv_1d(alpha, r, tol);
        return {-v.value / (2.0 * pi * r), v.error / (2.0 * pi * r)};
    }
    double inner_err = 0.0;
    auto g = [&](double u) {
        const double x = r * std::cosh(u);
        // far out: the differentiated series sum -(n alpha + 1) a_n x^{-n alpha - 2}
        auto coef = [&](int n, double& sg, double& l) {
            isotropic_coef(n, 1, alpha, sg, l);
            sg = -sg;
            l += std::log(n * alpha + 1.0);
        };
        if (x > 10.0 * std::max(r, 1.0)) {
            const auto sv = sum_series(coef, alpha, 2.0, x, 1e-15, 200, alpha > 1.0, 0);
            if (sv.converged && sv.achieved_tol <= 0.1 * tol) return sv.value;
        }
        const auto v = deriv_1d(alpha, x, 0.1 * tol);
        inner_err = std::max(inner_err, v.error);
        return v.value;
    };
    auto res = quad::integrate_half_line(g, 1.0, inversion_opts(tol));
    InversionValue out{-res.value / pi, (res.error + inner_err) / pi};
    if (!res.converged) throw NumericError("density_fourier: Abel integral did not converge", out.value, out.error);
    return out;
}

double positive_cms(double a, double theta, double v, double w) {
    const double b = 0.5 * pi * theta;
    return std::sin(a * (v + b)) / std::pow(std::cos(v), 1.0 / a) *
           std::pow(std::cos(v - a * (v + b)) / w, (1.0 - a) / a);
}

}  // namespace

double coeff_a(int n, int d, double alpha) {
    if (n < 1) throw DomainError("coeff_a: n must be >= 1");
    const double half = 0.5 * n * alpha;
    if (near_integer(half)) return 0.0;
    return parity(n) / std::pow(pi, 1.0 + 0.5 * d) * std::exp(-std::lgamma(n + 1.0)) * std::pow(2.0, n * alpha) *
           special::gamma(half + 1.0) * special::gamma(0.5 * (n * alpha + d)) * std::sin(pi * half);
}

double coeff_a_identity(int n, int d, double alpha) {
    if (n < 1) throw DomainError("coeff_a_identity: n must be >= 1");
    if (near_integer(0.5 * n * alpha)) return 0.0;
    return parity(n) * std::exp(-std::lgamma(n + 1.0)) * special::stable_constant_signed(d, n * alpha);
}

double coeff_b(int n, const SkewedStableParams& p) {
    if (n < 1) throw DomainError("coeff_b: n must be >= 1");
    const double arg = n * p.alpha * p.rho();
    if (near_integer(arg)) return 0.0;
    return parity(n) / pi * std::exp(std::lgamma(n * p.alpha + 1.0) - std::lgamma(n + 1.0)) * std::sin(pi * arg);
}

double coeff_d(int n, double alpha, double beta) {
    if (n < 1) throw DomainError("coeff_d: n must be >= 1");
    const SkewedStableParams p(alpha, beta);
    const double half = 0.5 * n * alpha;
    if (near_integer(half)) return 0.0;
    return parity(n) * 2.0 / pi * std::exp(std::lgamma(n * alpha + 1.0) - std::lgamma(n + 1.0)) *
           std::sin(pi * half) * std::cos(pi * half * p.theta());
}

SeriesValue density_series_isotropic(const IsotropicStableParams& p, double r, double tol, int n_max) {
    r = std::abs(r);
    if (!(r > 0.0)) throw DomainError("density_series_isotropic: |x| must be positive");
    if (!(p.alpha < 1.0)) throw DomainError("density_series_isotropic: convergent series needs alpha < 1");
    auto coef = [&](int n, double& s, double& l) { isotropic_coef(n, p.d, p.alpha, s, l); };
    auto out = sum_series(coef, p.alpha, p.d, r, tol, n_max, false, 0);
    if (!out.converged)
        throw NumericError("density_series_isotropic: no convergence within n_max terms", out.value, out.achieved_tol);
    return out;
}

SeriesValue density_series_1d(const SkewedStableParams& p, double x, int N, double tol, int n_max) {
    if (x == 0.0) throw DomainError("density_series_1d: x must be nonzero");
    const SkewedStableParams q = x > 0.0 ? p : p.reflected();
    x = std::abs(x);
    const bool asymptotic = p.alpha > 1.0;
    if (asymptotic && std::abs(p.beta) == 1.0)
        throw UnsupportedError("density_series_1d: alpha > 1 requires |beta| != 1");
    const double rho = q.rho();
    auto coef = [&](int n, double& s, double& l) { skewed_coef(n, q.alpha, rho, s, l); };
    auto out = sum_series(coef, q.alpha, 1.0, x, tol, n_max, asymptotic, N);
    if (!asymptotic && !out.converged)
        throw NumericError("density_series_1d: no convergence within n_max terms", out.value, out.achieved_tol);
    return out;
}

InversionValue density_fourier(const IsotropicStableParams& p, double r, double tol) {
    r = std::abs(r);
    if (p.d == 1) return fourier_1d(p.alpha, 0.0, r, tol);
    // d = 2: the angular form is several times cheaper once alpha is not small;
    // further out it cancels badly and can take minutes to give up
    if (p.d == 2 && p.alpha >= 0.5 && r > 0.0 && r <= 3.0) {
        try {
            return fourier_radial(p.alpha, 2, r, tol);
        } catch (const NumericError&) {
        }
    }
    if (p.d <= 3) return radial_from_1d(p.alpha, p.d, r, tol);
    return fourier_radial(p.alpha, p.d, r, tol);
}

InversionValue density_fourier(const SkewedStableParams& p, double x, double tol) {
    return fourier_1d(p.alpha, 0.5 * pi * p.theta() * p.alpha, x, tol);
}

double density(const IsotropicStableParams& p, double r) {
    r = std::abs(r);
    if (r > 0.0) {
        auto coef = [&](int n, double& s, double& l) { isotropic_coef(n, p.d, p.alpha, s, l); };
        const bool asymptotic = p.alpha >= 1.0;
        if (!asymptotic || r > 4.0) {
            auto sv = sum_series(coef, p.alpha, p.d, r, 1e-15, 200, asymptotic, 0);
            if (sv.converged && sv.achieved_tol <= 1e-13) return sv.value;
        }
    }
    return density_fourier(p, r, 1e-11).value;
}

double density(const SkewedStableParams& p, double x) {
    if (x != 0.0) {
        const SkewedStableParams q = x > 0.0 ? p : p.reflected();
        const double ax = std::abs(x);
        const double rho = q.rho();
        if (p.alpha < 1.0 && rho == 0.0) return 0.0;  // empty side of a one-sided law
        const bool asymptotic = p.alpha > 1.0;
        if (!asymptotic || (ax > 4.0 && std::abs(p.beta) != 1.0)) {
            auto coef = [&](int n, double& s, double& l) { skewed_coef(n, q.alpha, rho, s, l); };
            auto sv = sum_series(coef, q.alpha, 1.0, ax, 1e-15, 200, asymptotic, 0);
            if (sv.converged && sv.achieved_tol <= 1e-13) return sv.value;
        }
    }
    return density_fourier(p, x, 1e-11).value;
}

double cdf(const SkewedStableParams& p, double x) { return cdf_1d(p.alpha, 0.5 * pi * p.theta() * p.alpha, x); }

double cdf_symmetric(double alpha, double x) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("cdf_symmetric: alpha must lie in (0, 2)");
    return cdf_1d(alpha, 0.0, x);
}

double sample_positive(double alpha, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double v, w;
    do {
        v = pi * (unif(rng) - 0.5);
    } while (v <= -0.5 * pi);
    do {
        w = -std::log(unif(rng));
    } while (!(w > 0.0));
    return positive_cms(alpha, 1.0, v, w);
}

double sample_one(const SkewedStableParams& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double v, w;
    do {
        v = pi * (unif(rng) - 0.5);
    } while (v <= -0.5 * pi);
    do {
        w = -std::log(unif(rng));
    } while (!(w > 0.0));
    return positive_cms(p.alpha, p.theta(), v, w);
}

std::vector<double> sample(const SkewedStableParams& p, double t, std::mt19937_64& rng, long n) {
    if (n < 1) throw DomainError("sample: n must be >= 1");
    if (t < 0.0) throw DomainError("sample: t must be nonnegative");
    std::vector<double> out(n);
    const double scale = std::pow(t, 1.0 / p.alpha);
    for (auto& x : out) x = scale * sample_one(p, rng);
    return out;
}

std::vector<std::vector<double>> sample(const IsotropicStableParams& p, double t, std::mt19937_64& rng, long n) {
    if (n < 1) throw DomainError("sample: n must be >= 1");
    if (t < 0.0) throw DomainError("sample: t must be nonnegative");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = std::pow(t, 1.0 / p.alpha);
    std::vector<std::vector<double>> out(n, std::vector<double>(p.d));
    for (auto& x : out) {
        const double s = std::sqrt(2.0 * sample_positive(0.5 * p.alpha, rng));
        for (auto& c : x) c = scale * s * gauss(rng);
    }
    return out;
}

double mean_abs(const SkewedStableParams& p) {
    if (!(p.alpha > 1.0)) throw DomainError("mean_abs: requires alpha > 1 (the mean is infinite otherwise)");
    return 2.0 / pi * special::gamma(1.0 - 1.0 / p.alpha) * std::cos(0.5 * pi * p.theta());
}

double mean_abs_quadrature(const SkewedStableParams& p) {
    if (!(p.alpha > 1.0)) throw DomainError("mean_abs_quadrature: requires alpha > 1");
    auto f = [&](double x) { return x * (density(p, x) + density(p, -x)); };
    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-10;
    auto res = quad::integrate_half_line(f, 1.0, opt);
    if (!res.converged) throw NumericError("mean_abs_quadrature: no convergence", res.value, res.error);
    return res.value;
}

double radial_moment_integral(const IsotropicStableParams& p) {
    if (!(p.alpha < 1.0)) throw DomainError("radial_moment_integral: requires alpha < 1");
    auto f = [&](double r) { return std::pow(r, p.d) * density(p, r); };
    quad::Options opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-11;
    auto res = quad::integrate(f, 0.0, 1.0, opt);
    if (!res.converged) throw NumericError("radial_moment_integral: quadrature did not converge", res.value, res.error);
    return res.value;
}

}  // namespace nlheat::stable
