// Acceptance run: one PASS/FAIL line per criterion, with the measured value,
// the pinned tolerance and the runtime against its budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nlheat/expansion.hpp"
#include "nlheat/geometry.hpp"
#include "nlheat/heat.hpp"
#include "nlheat/levy.hpp"
#include "nlheat/special.hpp"
#include "nlheat/stable.hpp"

using namespace nlheat;
using geometry::Body;
using geometry::CovarianceFn;
using geometry::Point;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void require(Outcome& o, bool ok, const std::string& what) {
    if (!ok) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return g;
}

// 2 L^{1-s} / (s (1 - s)) is the s-perimeter of an interval of length L
double interval_stable_perimeter(double s) { return special::stable_constant(1, s) * 2.0 / (s * (1.0 - s)); }

expansion::VerifyReport verify(expansion::Limit limit, double alpha, std::vector<double> t, int n = 1,
                               expansion::Engine engine = expansion::Engine::Exact1D) {
    expansion::VerifyRequest req;
    req.limit = limit;
    req.n = n;
    req.driver = stable::IsotropicStableParams(alpha, 1);
    req.t = std::move(t);
    req.engine = engine;
    return expansion::verify_limit(req);
}

Outcome first_order() {
    Outcome o;
    std::vector<double> t;
    for (int k = 0; k <= 10; ++k) t.push_back(1e-2 * std::pow(2.0, -k));
    const auto r = verify(expansion::Limit::FirstOrder, 0.5, t, 1, expansion::Engine::Quadrature);
    const double target = 8 * special::stable_constant(1, 0.5);
    const double e = rel(r.extrapolated, target);
    o.detail = fmt("H/t -> %.10g, 8A = %.10g, rel %.2e (tol 1e-2)", r.extrapolated, target, e);
    require(o, e < 1e-2, "relative error");
    return o;
}

Outcome perimeter_series() {
    Outcome o;
    const auto r = verify(expansion::Limit::PerimeterSeries, 0.4, log_grid(1e-3, 1e-5, 9), 2);
    const double target = -interval_stable_perimeter(0.8) / 2;
    const double e = rel(r.extrapolated, target);
    o.detail = fmt("(H - t Per)/t^2 -> %.10g, -Per_0.8/2 = %.10g, rel %.2e (tol 2e-2)", r.extrapolated, target, e);
    require(o, e < 2e-2, "relative error");
    return o;
}

Outcome log_term() {
    Outcome o;
    std::vector<double> t;
    for (int k = 0; k < 14; ++k) t.push_back(1e-2 * std::pow(0.5, k));
    const auto r = verify(expansion::Limit::LogTerm, 0.5, t);
    const double target = -2 / M_PI;
    const double e = rel(r.extrapolated, target);
    o.detail = fmt("A = %.10g, -2/pi = %.10g, rel %.2e (tol 1e-1)", r.extrapolated, target, e);
    require(o, e < 1e-1, "relative error");
    return o;
}

Outcome power_term() {
    Outcome o;
    const double alpha = 0.4;
    // independent constant: Per (int_0^1 r p_1 dr - sum a_n / (1 - n alpha)) in d = 1
    const double moment = stable::radial_moment_integral(stable::IsotropicStableParams(alpha, 1));
    const auto series = expansion::a_series_sum(1, alpha);
    const double target = 2.0 * (moment - series.value);
    const auto r = verify(expansion::Limit::PowerTerm, alpha, log_grid(1e-2, 1e-5, 13));
    const double e = rel(r.extrapolated, target);
    o.detail = fmt("t^-2.5 residual -> %.10g, constant = %.10g, rel %.2e (tol 5e-2)", r.extrapolated, target, e);
    require(o, e < 5e-2, "relative error");
    return o;
}

Outcome mean_abs_term() {
    Outcome o;
    const Body I = Body::interval(0, 1);
    const stable::SkewedStableParams p(1.5, 0.3);
    const auto s = expansion::prop_expansion_1d(I, p, 2);
    const double m = stable::mean_abs(p), c1 = s.terms.at(1).coefficient;
    require(o, std::abs(s.terms[0].coefficient - m) <= 1e-12 * m, "leading coefficient is mean_abs");
    auto remainder = [&](double t) { return heat::heat_content_exact_1d(I, p, t) - m * std::pow(t, 1 / 1.5); };
    const double t0 = 1e-4;
    const double e = rel(remainder(t0), c1 * t0);
    // log-log slope of H - mean_abs t^{2/3} - c1 t over one decade
    const auto g = log_grid(1e-2, 1e-1, 6);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double t : g) {
        const double x = std::log(t), y = std::log(std::abs(remainder(t) - c1 * t));
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double k = g.size();
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    o.detail = fmt("n=1 term rel %.2e (tol 3e-2), remainder slope %.4f (2 +- 0.1)", e, slope);
    require(o, e < 3e-2, "n=1 term");
    require(o, std::abs(slope - 2) <= 0.1, "remainder slope");
    return o;
}

Outcome compound_poisson() {
    Outcome o;
    const Body I = Body::interval(0, 1);
    const auto nu = levy::LevyMeasure::atoms({{{0.3}, 2.0}, {{-0.7}, 0.5}});
    for (double t : {0.05, 0.1}) {
        const auto rep = expansion::compound_poisson_partial_sums(I, nu, t, 25);
        heat::HeatContentRequest req{I, nu, {t}};
        req.method = heat::Method::MonteCarlo;
        req.mc_samples = 1000000;
        req.seed = 2024;
        const auto mc = heat::heat_content(req);
        const double z = std::abs(mc.H[0] - rep.exact) / mc.error[0];
        o.detail += fmt("t=%.2f: K=25 rel %.1e, MC %.2f sigma  ", t, rep.rel_error.back(), z);
        require(o, rep.rel_error.back() < 1e-8, "series by K=25");
        require(o, z < 4, "Monte Carlo within 4 sigma");
    }
    return o;
}

Outcome density_engine() {
    Outcome o;
    double worst = 0;
    for (int d : {1, 2})
        for (double alpha : {0.3, 0.5, 0.7}) {
            const stable::IsotropicStableParams p(alpha, d);
            for (double r = 1.0; r <= 20.0; r += 0.5)
                worst = std::max(worst, rel(stable::density_series_isotropic(p, r).value,
                                            stable::density_fourier(p, r).value));
        }
    // alpha > 1: three-term asymptotic sum; envelope C x^{-4 alpha - 1} fitted on the upper part of the range
    const stable::SkewedStableParams q(1.5, 0.5);
    auto gap = [&](double x) {
        return std::abs(stable::density_series_1d(q, x, 3).value - stable::density_fourier(q, x).value);
    };
    double C = 0;
    for (double x : {20.0, 30.0, 40.0, 50.0}) C = std::max(C, gap(x) * std::pow(x, 7.0));
    double excess = 0;
    for (double x = 5.0; x <= 50.0; x += 2.5) excess = std::max(excess, gap(x) / (C * std::pow(x, -7.0)));
    o.detail = fmt("isotropic max rel %.2e (tol 1e-6); skewed C = %.3g, max gap/envelope %.3f", worst, C, excess);
    require(o, worst < 1e-6, "isotropic series vs inversion");
    require(o, excess <= 1.05, "skewed envelope");
    return o;
}

double norm(const Point& y) {
    double s = 0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

Outcome geometry_suite() {
    Outcome o;
    struct Case {
        Body body;
        double perimeter;
        double tol;
    };
    const std::vector<Case> cases{
        {Body::interval(0, 1), 2.0, 1e-12},
        {Body(geometry::Box{{{0, 1}, {0, 2}}}), 6.0, 1e-12},
        {Body::ball(2, 1.0), 2 * M_PI, 1e-3},
        {Body::ball(3, 1.0), 4 * M_PI, 1e-3},
        {Body(geometry::Polygon2D{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}}), 8.0, 1e-12},
    };
    std::mt19937_64 rng(99);
    int mc_total = 0, mc_out = 0;
    double ball_err = 0;
    for (const auto& c : cases) {
        const CovarianceFn g(c.body);
        const int d = c.body.dimension();
        const double per = g.perimeter();
        require(o, std::abs(per - c.perimeter) <= c.tol * c.perimeter, "perimeter of " + c.body.name());
        if (c.body.name().find("ball") != std::string::npos && d == 2) ball_err = std::abs(per - 2 * M_PI);
        std::normal_distribution<double> N(0.0, 1.0);
        for (int i = 0; i < 40; ++i) {
            Point y(d), z(d);
            for (auto& v : y) v = N(rng) * 0.5 * c.body.diam();
            for (int k = 0; k < d; ++k) z[k] = y[k] + 0.03 * N(rng);
            Point my = y;
            for (auto& v : my) v = -v;
            const double gy = g(y);
            require(o, std::abs(gy - g(my)) <= 1e-12 * c.body.volume(), "symmetry");
            require(o, gy >= 0 && gy <= c.body.volume() * (1 + 1e-14), "range");
            if (norm(y) >= c.body.diam()) require(o, gy == 0.0, "support");
            Point dy(d);
            for (int k = 0; k < d; ++k) dy[k] = y[k] - z[k];
            require(o, std::abs(gy - g(z)) <= 0.5 * per * norm(dy) + 1e-12, "Lipschitz Per/2");
            if (i < 5) {
                const auto mc = geometry::covariance_mc_oracle(c.body, y, 1000000, 1000 + mc_total);
                ++mc_total;
                if (std::abs(mc.value - gy) > 4 * mc.stderr_ + 1e-12) ++mc_out;
            }
        }
    }
    o.detail = fmt("perimeters ok, disk |Per - 2pi| = %.1e (tol 1e-3), MC outside 4 sigma: %.0f of %.0f", ball_err,
                   mc_out, mc_total);
    require(o, ball_err <= 1e-3, "disk perimeter");
    require(o, mc_out == 0, "Monte Carlo oracle");
    return o;
}

Outcome scaling_suite() {
    Outcome o;
    using levy::LevyMeasure;
    double worst_lc = 0;
    for (double alpha : {0.3, 0.5, 0.8})
        for (int d : {1, 2, 3})
            for (double r : {0.1, 1.0, 10.0})
                worst_lc = std::max(worst_lc, LevyMeasure::isotropic_stable(alpha, d).truncated_moment(1.0, r).rel_diff);
    worst_lc = std::max(worst_lc, LevyMeasure::one_dim_stable(0.6, 0.4).truncated_moment(1.5, 2.0).rel_diff);
    require(o, worst_lc < 1e-8, "layer-cake identity");

    const std::vector<LevyMeasure> all{LevyMeasure::isotropic_stable(0.5, 1), LevyMeasure::isotropic_stable(0.8, 3),
                                       LevyMeasure::one_dim_stable(0.4, -0.7),
                                       LevyMeasure::atoms({{{0.2}, 1.0}, {{3.0}, 2.0}})};
    for (const auto& nu : all)
        for (double r : log_grid(1e-3, 1e3, 61))
            require(o, nu.tail_mass(r) <= nu.concentration_h(r) * (1 + 1e-12) + 1e-15, "tail <= h");

    double worst_h = 0;
    for (double alpha : {0.25, 0.5, 0.9, 1.5})
        for (int d : {1, 2}) {
            const auto nu = LevyMeasure::isotropic_stable(alpha, d);
            for (double r : {1e-2, 1.0, 30.0})
                for (double lam : {2.0, 10.0})
                    worst_h = std::max(worst_h,
                                       rel(nu.concentration_h(lam * r), std::pow(lam, -alpha) * nu.concentration_h(r)));
        }
    require(o, worst_h < 1e-12, "h homogeneity");

    double worst_c = 0;
    for (double a : {0.25, 0.5, 0.75}) {
        const auto rep = levy::check_wusc(levy::LogSymbol{}, a, 1.0, log_grid(1.0, 1e6, 61), log_grid(1.0 + 1e-9, 1e3, 31));
        worst_c = std::max(worst_c, rep.c_emp * a / 4);
        require(o, rep.c_emp <= 4 / a && rep.bounded, "log symbol WUSC");
    }
    o.detail = fmt("layer-cake %.1e (tol 1e-8), homogeneity %.1e, max C alpha/4 = %.3f", worst_lc, worst_h, worst_c);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {"1 first-order", 30, first_order},   {"2 perimeter-series", 60, perimeter_series},
        {"3 log-term", 60, log_term},         {"4 power-term", 120, power_term},
        {"5 mean-abs", 120, mean_abs_term},   {"6 compound-poisson", 60, compound_poisson},
        {"7 density", 120, density_engine},   {"8 geometry", 60, geometry_suite},
        {"9 scaling", 10, scaling_suite},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail += "; over time budget";
        }
        if (!o.pass) ++failed;
        std::printf("%s  %-20s %6.1f s / %3.0f s  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, c.budget_s,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
