#pragma once

// Adaptive Gauss-Kronrod quadrature (15-point Kronrod / 7-point Gauss
// panels) with QUADPACK-style error estimation, plus log-scale panel
// integrators for (semi-)infinite ranges and endpoint power singularities.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace nlheat::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_depth = 50;
    int max_intervals = 5000;
    double panel_width = 2.0;  // in log-space, for the semi-infinite helpers
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    bool converged = false;
    long evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T>
struct Panel {
    double a, b;
    T value;
    double error;
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// One GK15 panel: value and QUADPACK error estimate.
template <class T, class F>
Panel<T> gk15(F& f, double a, double b, int depth) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T resk = fc * wgk[7];
    T resg = fc * wg[3];
    double resabs = magnitude(fc) * wgk[7];
    std::array<T, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        resk += (f1[j] + f2[j]) * wgk[j];
        resabs += (magnitude(f1[j]) + magnitude(f2[j])) * wgk[j];
        if (j % 2 == 1) resg += (f1[j] + f2[j]) * wg[j / 2];
    }
    const T reskh = resk * 0.5;
    double resasc = wgk[7] * magnitude(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += wgk[j] * (magnitude(f1[j] - reskh) + magnitude(f2[j] - reskh));
    const double ah = std::abs(h);
    resasc *= ah;
    resabs *= ah;
    double err = magnitude((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * std::numeric_limits<double>::epsilon()))
        err = std::max(50.0 * std::numeric_limits<double>::epsilon() * resabs, err);
    return Panel<T>{a, b, resk * h, err, depth};
}

}  // namespace detail

/// Globally adaptive GK15 on [a, b] with optional interior breakpoints.
template <class T = double, class F>
Result<T> integrate(F&& f, double a, double b, const Options& opt = {}, std::span<const double> breaks = {}) {
    Result<T> out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::priority_queue<detail::Panel<T>> heap;
    T total{};
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto p = detail::gk15<T>(f, pts[i], pts[i + 1], 0);
        out.evaluations += 15;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    std::vector<detail::Panel<T>> done;  // panels that can no longer be split
    int intervals = static_cast<int>(heap.size());
    while (!heap.empty()) {
        const double tol = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
        if (total_err <= tol) break;
        if (intervals >= opt.max_intervals) break;
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (worst.depth >= opt.max_depth || !(mid > worst.a && mid < worst.b)) {
            done.push_back(worst);
            continue;
        }
        auto left = detail::gk15<T>(f, worst.a, mid, worst.depth + 1);
        auto right = detail::gk15<T>(f, mid, worst.b, worst.depth + 1);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // re-sum to limit accumulated cancellation from the incremental updates
    T sum{};
    double err = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    for (const auto& p : done) {
        sum += p.value;
        err += p.error;
    }
    out.value = sum * sign;
    out.error = err;
    out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(sum));
    return out;
}

namespace detail {

// Sum log-spaced panels produced by panel(k) until the geometric tail
// estimate falls under tolerance.
template <class T, class PanelFn>
Result<T> sum_panels(PanelFn&& panel, int max_panels, const Options& opt) {
    Result<T> out;
    T sum{};
    double err = 0.0;
    double prev = -1.0;
    int small_run = 0;
    bool tail_ok = false;
    for (int k = 0; k < max_panels; ++k) {
        Result<T> p = panel(k);
        out.evaluations += p.evaluations;
        sum += p.value;
        err += p.error;
        const double m = magnitude(p.value);
        const double tol = std::max(opt.abs_tol, opt.rel_tol * magnitude(sum));
        double tail = m;
        if (prev > 0.0) {
            const double q = m / prev;
            tail = (q < 0.95) ? m * q / (1.0 - q) : std::numeric_limits<double>::infinity();
        }
        if (k >= 2 && tail <= 0.1 * tol && m <= tol) {
            if (++small_run >= 2) {
                err += tail;
                tail_ok = true;
                break;
            }
        } else {
            small_run = 0;
        }
        prev = m;
    }
    out.value = sum;
    out.error = err;
    out.converged = tail_ok && err <= 10.0 * std::max(opt.abs_tol, opt.rel_tol * magnitude(sum));
    return out;
}

}  // namespace detail

/// Integral over [a, inf), a > 0, via the substitution x = e^v (panels in v).
/// Algebraic tails become exponential in v.
template <class T = double, class F>
Result<T> integrate_to_infinity(F&& f, double a, const Options& opt = {}) {
    const double v0 = std::log(a);
    const double w = opt.panel_width;
    auto g = [&](double v) {
        const double x = std::exp(v);
        return T(f(x) * x);
    };
    const int max_panels = static_cast<int>((700.0 - v0) / w);
    return detail::sum_panels<T>([&](int k) { return integrate<T>(g, v0 + k * w, v0 + (k + 1) * w, opt); },
                                 max_panels, opt);
}

/// Integral over (0, b], b > 0, via x = b e^{-v}; handles x^p singularities at 0, p > -1.
template <class T = double, class F>
Result<T> integrate_from_zero(F&& f, double b, const Options& opt = {}) {
    const double w = opt.panel_width;
    auto g = [&](double v) {
        const double x = b * std::exp(-v);
        return T(f(x) * x);
    };
    return detail::sum_panels<T>([&](int k) { return integrate<T>(g, k * w, (k + 1) * w, opt); },
                                 static_cast<int>(700.0 / w), opt);
}

/// Integral over (0, inf) split at `scale`.
template <class T = double, class F>
Result<T> integrate_half_line(F&& f, double scale, const Options& opt = {}) {
    auto lo = integrate_from_zero<T>(f, scale, opt);
    auto hi = integrate_to_infinity<T>(f, scale, opt);
    Result<T> out;
    out.value = lo.value + hi.value;
    out.error = lo.error + hi.error;
    out.evaluations = lo.evaluations + hi.evaluations;
    out.converged = lo.converged && hi.converged;
    return out;
}

/// Integral over [a, b], 0 <= a < b, with the integrand sampled on a
/// logarithmic scale near a (singular at a).
template <class T = double, class F>
Result<T> integrate_singular_left(F&& f, double a, double b, const Options& opt = {}) {
    return integrate_from_zero<T>([&](double u) { return f(a + u); }, b - a, opt);
}

/// Integral over [a, b], 0 < a < b, in the variable v = log x; suited to
/// integrands varying on the scale of x over many decades.
template <class T = double, class F>
Result<T> integrate_log(F&& f, double a, double b, const Options& opt = {}) {
    auto g = [&](double v) {
        const double x = std::exp(v);
        return T(f(x) * x);
    };
    const double la = std::log(a), lb = std::log(b);
    std::vector<double> breaks;
    for (double v = la + opt.panel_width; v < lb; v += opt.panel_width) breaks.push_back(v);
    return integrate<T>(g, la, lb, opt, breaks);
}

}  // namespace nlheat::quad
