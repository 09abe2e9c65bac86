#include "nlheat/heat.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nlheat/errors.hpp"
#include "nlheat/parallel.hpp"
#include "nlheat/quadrature.hpp"
#include "nlheat/semigroup.hpp"
#include "nlheat/special.hpp"
#include "nlheat/stable.hpp"

namespace nlheat::heat {

using geometry::Body;
using geometry::CovarianceFn;
using geometry::Point;
using special::pi;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

quad::Options opts(double rel, double abs = 1e-300) {
    quad::Options o;
    o.abs_tol = abs;
    o.rel_tol = rel;
    o.max_intervals = 20000;
    return o;
}

struct Accum {
    double value = 0.0;
    double error = 0.0;
    bool ok = true;
    template <class R>
    void add(const R& r) {
        value += r.value;
        error += r.error;
        ok = ok && r.converged;
    }
};

// int_a^b h, choosing plain or log-scale panels.
template <class F>
void segment(Accum& acc, F& h, double a, double b, double rel) {
    if (!(b > a)) return;
    if (a > 0.0 && b / a > 8.0)
        acc.add(quad::integrate_log(h, a, b, opts(rel)));
    else
        acc.add(quad::integrate(h, a, b, opts(rel)));
}

// Radial stable driver: P(r) = density along a ray (symmetrized in 1-D).
struct RadialDriver {
    int d;
    double alpha;
    std::function<double(double)> P;
};

RadialDriver radial_driver(const Driver& driver, int d) {
    if (const auto* p = std::get_if<stable::IsotropicStableParams>(&driver)) {
        if (p->d != d) throw DomainError("heat content: driver and body dimensions differ");
        const auto q = *p;
        return {d, q.alpha, [q](double r) { return stable::density(q, r); }};
    }
    if (const auto* p = std::get_if<stable::SkewedStableParams>(&driver)) {
        if (d != 1) throw DomainError("heat content: skewed driver needs a 1-D body");
        const auto q = *p;
        return {1, q.alpha, [q](double r) { return 0.5 * (stable::density(q, r) + stable::density(q, -r)); }};
    }
    throw UnsupportedError("heat content: driver has no stable density");
}

// H(t) = int_0^inf P(r) r^{d-1} G(s r) dr, s = t^{1/alpha}.
std::pair<double, double> stable_heat(const CovarianceFn& cov, const RadialDriver& drv, double t, double rel) {
    if (t == 0.0) return {0.0, 0.0};
    const geometry::AngularDeficit G(cov);
    const int d = drv.d;
    const double s = std::pow(t, 1.0 / drv.alpha);
    const double R = cov.body().diam() / s;
    auto h = [&](double r) { return drv.P(r) * std::pow(r, d - 1) * G(s * r); };
    std::vector<double> br{1.0};
    for (double k : G.kinks()) br.push_back(k / s);
    std::sort(br.begin(), br.end());
    Accum acc;
    double a = 0.0;
    for (double b : br) {
        if (b > R) break;
        segment(acc, h, a, b, rel);
        a = b;
    }
    segment(acc, h, a, R, rel);
    const double g0 = cov.body().volume();
    auto tail = [&](double r) { return drv.P(r) * std::pow(r, d - 1); };
    auto tr = quad::integrate_to_infinity(tail, R, opts(rel));
    acc.value += special::sphere_area(d) * g0 * tr.value;
    acc.error += special::sphere_area(d) * g0 * tr.error;
    if (!acc.ok || !tr.converged) throw NumericError("heat content quadrature did not converge", acc.value, acc.error);
    return {acc.value, acc.error};
}

semigroup::HolderFunction covariance_function(const CovarianceFn& cov) {
    semigroup::HolderFunction f;
    f.f = [&cov](const Point& y) { return cov(y); };
    f.beta = 1.0;
    f.sup_norm = cov.body().volume();
    f.support_radius = cov.body().diam();
    if (cov.body().dimension() == 1) f.kinks = {-cov.body().diam(), 0.0, cov.body().diam()};
    return f;
}

void check_grid(const std::vector<double>& t) {
    if (t.empty()) throw DomainError("heat content: empty t grid");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] >= 0.0) || !std::isfinite(t[i])) throw DomainError("heat content: t must be nonnegative");
        if (i > 0 && !(t[i] > t[i - 1])) throw DomainError("heat content: t grid must be strictly ascending");
    }
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::Quadrature: return "quadrature";
        case Method::MonteCarlo: return "mc";
        case Method::Exact1D: return "exact_1d";
    }
    return "?";
}

PerimeterResult nonlocal_perimeter(const Body& body, const levy::LevyMeasure& nu, double tol) {
    if (body.dimension() != nu.dimension()) throw DomainError("nonlocal_perimeter: dimension mismatch");
    const CovarianceFn cov(body);
    const double g0 = body.volume();
    PerimeterResult out;
    if (const auto* m = std::get_if<levy::FiniteAtomic>(&nu.family())) {
        for (const auto& a : m->atoms) out.value += a.mass * (g0 - cov(a.location));
        out.method = "atomic_sum";
        return out;
    }
    const double alpha = nu.stable_index();
    const bool is_stable = std::isfinite(alpha);
    if (is_stable && alpha >= 1.0) {
        out.divergent = true;
        out.value = std::numeric_limits<double>::infinity();
        out.alpha_perimeter = out.value;
        out.method = "divergent";
        return out;
    }
    const double A = std::holds_alternative<levy::IsotropicStable>(nu.family())
                         ? special::stable_constant(body.dimension(), alpha)
                         : std::numeric_limits<double>::quiet_NaN();
    if (const auto* iv = std::get_if<geometry::Interval>(&body.shape()); iv && is_stable) {
        const double K = nu.radial_stable_coefficient();  // c_+ + c_-
        out.value = K / (alpha * (1.0 - alpha)) * std::pow(iv->b - iv->a, 1.0 - alpha);
        out.alpha_perimeter = out.value / A;
        out.method = "closed_form";
        return out;
    }
    const geometry::AngularDeficit G(cov);
    const double D = body.diam();
    auto h = [&](double s) { return nu.polar_density(s) * G(s); };
    Accum acc;
    std::vector<double> br = G.kinks();
    double a = std::min(1.0, br.front());
    acc.add(quad::integrate_from_zero(h, a, opts(tol, 1e-300)));
    for (double b : br) {
        if (b > D) break;
        segment(acc, h, a, b, tol);
        a = b;
    }
    out.value = acc.value + g0 * nu.tail_mass(D);
    out.error = acc.error;
    out.alpha_perimeter = out.value / A;
    out.method = "radial_quadrature";
    if (!acc.ok) throw NumericError("nonlocal_perimeter: quadrature did not converge", out.value, out.error);
    return out;
}

double stable_perimeter(const Body& body, double s) {
    return nonlocal_perimeter(body, levy::LevyMeasure::isotropic_stable(s, body.dimension())).value;
}

double heat_content_exact_1d(const Body& interval, const stable::SkewedStableParams& p, double t, double rel_tol) {
    const auto* iv = std::get_if<geometry::Interval>(&interval.shape());
    if (!iv) throw DomainError("heat_content_exact_1d: body must be an interval");
    if (t < 0.0) throw DomainError("heat_content_exact_1d: t must be nonnegative");
    if (t == 0.0) return 0.0;
    const double L = iv->b - iv->a;
    const double s = std::pow(t, 1.0 / p.alpha);
    const double X = L / s;
    auto q = [&](double x) { return stable::density(p, x) + stable::density(p, -x); };
    auto body = [&](double x) { return s * x * q(x); };
    Accum acc;
    if (X <= 1.0) {
        segment(acc, body, 0.0, X, rel_tol);
    } else {
        segment(acc, body, 0.0, 1.0, rel_tol);
        segment(acc, body, 1.0, X, rel_tol);
    }
    auto tail = quad::integrate_to_infinity(q, X, opts(rel_tol));
    if (!acc.ok || !tail.converged)
        throw NumericError("heat_content_exact_1d: quadrature did not converge", acc.value + L * tail.value, acc.error);
    return acc.value + L * tail.value;
}

double heat_content_exact_1d(const Body& interval, double alpha, double t, double rel_tol) {
    if (alpha == 1.0) throw UnsupportedError("heat_content_exact_1d: alpha = 1 is excluded");
    return heat_content_exact_1d(interval, stable::SkewedStableParams(alpha, 0.0), t, rel_tol);
}

EvalReport heat_content_quadrature(const HeatContentRequest& req) {
    check_grid(req.t);
    const CovarianceFn cov(req.body);
    EvalReport rep;
    rep.method = Method::Quadrature;
    rep.t = req.t;
    rep.H.assign(req.t.size(), 0.0);
    rep.error.assign(req.t.size(), 0.0);
    if (const auto* nu = std::get_if<levy::LevyMeasure>(&req.driver)) {
        if (!nu->is_finite()) throw UnsupportedError("heat content: infinite Levy measure as driver");
        const auto f = covariance_function(cov);
        const Point origin(req.body.dimension(), 0.0);
        parallel_for(
            req.t.size(),
            [&](std::size_t i) {
                auto pv = semigroup::compound_poisson_apply(*nu, f, req.t[i], origin, 1e-16);
                rep.H[i] = req.body.volume() - pv.value;
                rep.error[i] = pv.tail_bound;
            },
            req.threads);
    } else {
        const RadialDriver drv = radial_driver(req.driver, req.body.dimension());
        parallel_for(
            req.t.size(),
            [&](std::size_t i) {
                auto [h, e] = stable_heat(cov, drv, req.t[i], req.rel_tol);
                rep.H[i] = h;
                rep.error[i] = e;
            },
            req.threads);
    }
    for (double h : rep.H) rep.H_omega.push_back(req.body.volume() - h);
    return rep;
}

EvalReport heat_content_mc(const HeatContentRequest& req) {
    check_grid(req.t);
    const CovarianceFn cov(req.body);
    const auto f = covariance_function(cov);
    const Point origin(req.body.dimension(), 0.0);
    EvalReport rep;
    rep.method = Method::MonteCarlo;
    rep.t = req.t;
    rep.H.assign(req.t.size(), 0.0);
    rep.error.assign(req.t.size(), 0.0);
    parallel_for(
        req.t.size(),
        [&](std::size_t i) {
            auto mc = semigroup::semigroup_apply_mc(f, req.driver, req.t[i], origin, req.mc_samples, req.seed + i);
            rep.H[i] = req.body.volume() - mc.value;
            rep.error[i] = mc.stderr_;
        },
        req.threads);
    for (double h : rep.H) rep.H_omega.push_back(req.body.volume() - h);
    return rep;
}

EvalReport heat_content(const HeatContentRequest& req) {
    switch (req.method) {
        case Method::Quadrature: return heat_content_quadrature(req);
        case Method::MonteCarlo: return heat_content_mc(req);
        case Method::Exact1D: {
            check_grid(req.t);
            stable::SkewedStableParams p;
            if (const auto* q = std::get_if<stable::SkewedStableParams>(&req.driver))
                p = *q;
            else if (const auto* q = std::get_if<stable::IsotropicStableParams>(&req.driver); q && q->d == 1)
                p = stable::SkewedStableParams(q->alpha, 0.0);
            else
                throw UnsupportedError("exact_1d: needs a 1-D stable driver");
            EvalReport rep;
            rep.method = Method::Exact1D;
            rep.t = req.t;
            rep.H.assign(req.t.size(), 0.0);
            rep.error.assign(req.t.size(), 0.0);
            parallel_for(
                req.t.size(),
                [&](std::size_t i) {
                    rep.H[i] = heat_content_exact_1d(req.body, p, req.t[i], std::max(req.rel_tol, 1e-14));
                    rep.error[i] = std::abs(rep.H[i]) * req.rel_tol;
                },
                req.threads);
            for (double h : rep.H) rep.H_omega.push_back(req.body.volume() - h);
            return rep;
        }
    }
    throw UnsupportedError("heat content: unknown method");
}

}  // namespace nlheat::heat
