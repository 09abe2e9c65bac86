#include "nlheat/special.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "nlheat/errors.hpp"

namespace nlheat::special {

namespace {

// Lanczos approximation, g = 7, n = 9.
constexpr double lanczos_g = 7.0;
constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_sum(double z) {
    double a = lanczos_coef[0];
    for (std::size_t i = 1; i < lanczos_coef.size(); ++i) a += lanczos_coef[i] / (z + static_cast<double>(i));
    return a;
}

bool is_pole(double x) { return x <= 0.0 && x == std::nearbyint(x); }

// log Gamma for x >= 0.5.
double log_gamma_pos(double x) {
    const double z = x - 1.0;
    const double t = z + lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(lanczos_sum(z));
}

double sin_pi(double x) {
    // sin(pi x) with exact zeros at integers
    const double r = std::remainder(x, 2.0);
    if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
    return std::sin(pi * r);
}

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw NumericError("ibeta: continued fraction did not converge", h);
}

}  // namespace

double gamma(double x) {
    if (is_pole(x)) throw DomainError("gamma: pole at non-positive integer");
    if (x < 0.5) return pi / (sin_pi(x) * gamma(1.0 - x));
    if (x > 171.7) return std::numeric_limits<double>::infinity();
    const double z = x - 1.0;
    const double t = z + lanczos_g + 0.5;
    const double p = std::pow(t, 0.5 * (z + 0.5));
    return std::sqrt(2.0 * pi) * p * (p * std::exp(-t)) * lanczos_sum(z);
}

double log_gamma(double x) {
    if (is_pole(x)) throw DomainError("log_gamma: pole at non-positive integer");
    if (x < 0.5) return std::log(pi / std::abs(sin_pi(x))) - log_gamma_pos(1.0 - x);
    return log_gamma_pos(x);
}

double gamma_sign(double x) {
    if (is_pole(x)) throw DomainError("gamma_sign: pole at non-positive integer");
    if (x > 0.0) return 1.0;
    // Gamma alternates sign between consecutive negative integers; negative on (-1, 0).
    const double k = std::floor(x);
    return (static_cast<long long>(-k) % 2 == 1) ? -1.0 : 1.0;
}

double rgamma(double x) {
    if (is_pole(x)) return 0.0;
    return 1.0 / gamma(x);
}

double ibeta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw DomainError("ibeta: parameters must be positive");
    if (x < 0.0 || x > 1.0) throw DomainError("ibeta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lbt = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double sphere_area(int d) {
    if (d < 1) throw DomainError("sphere_area: dimension must be >= 1");
    return 2.0 * std::pow(pi, 0.5 * d) / gamma(0.5 * d);
}

double ball_volume(int d) {
    if (d < 1) throw DomainError("ball_volume: dimension must be >= 1");
    return std::pow(pi, 0.5 * d) / gamma(0.5 * d + 1.0);
}

double stable_constant(int d, double s) {
    if (!(s > 0.0 && s < 2.0)) throw DomainError("stable_constant: exponent must lie in (0, 2)");
    return std::pow(2.0, s) * gamma(0.5 * (d + s)) / (std::pow(pi, 0.5 * d) * std::abs(gamma(-0.5 * s)));
}

double stable_constant_signed(int d, double s) {
    if (s <= 0.0) throw DomainError("stable_constant_signed: exponent must be positive");
    const double half = 0.5 * s;
    if (half == std::nearbyint(half)) throw DomainError("stable_constant_signed: s/2 is an integer");
    // 1/(-Gamma(-s/2)) in log form to survive large s
    const double mag = std::exp(s * std::log(2.0) + log_gamma(0.5 * (d + s)) - log_gamma(-half) -
                                0.5 * d * std::log(pi));
    return -gamma_sign(-half) * mag;
}

double ball_lens_volume(int d, double r, double dist) {
    if (r <= 0.0) throw DomainError("ball_lens_volume: radius must be positive");
    dist = std::abs(dist);
    if (dist >= 2.0 * r) return 0.0;
    const double vol = ball_volume(d) * std::pow(r, d);
    if (dist == 0.0) return vol;
    const double x = 1.0 - dist * dist / (4.0 * r * r);
    return vol * ibeta(0.5 * (d + 1), 0.5, x);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace nlheat::special
