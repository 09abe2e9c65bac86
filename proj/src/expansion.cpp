#include "nlheat/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "nlheat/errors.hpp"
#include "nlheat/extrapolation.hpp"
#include "nlheat/quadrature.hpp"
#include "nlheat/semigroup.hpp"
#include "nlheat/special.hpp"
#include "nlheat/stable.hpp"

namespace nlheat::expansion {

using geometry::Body;
using geometry::CovarianceFn;
using geometry::Point;

namespace {

constexpr double kOrderEps = 1e-12;

bool is_integer(double x) { return std::abs(x - std::round(x)) < kOrderEps; }

double factorial(int n) { return std::exp(std::lgamma(n + 1.0)); }

double sign_pow(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }  // (-1)^k, k >= 0

// sum_{n>=1, n != skip} f(n) with the truncation rule of the module: stop once
// two consecutive terms fall below 1e-14 |partial| (single zero terms occur
// where sin(pi n alpha / 2) vanishes) or at n = 500.
template <class F>
SeriesSum truncated_sum(F f, int skip = -1) {
    SeriesSum s;
    int small = 0;
    for (int n = 1; n <= 500; ++n) {
        if (n == skip) continue;
        const double term = f(n);
        s.value += term;
        s.terms = n;
        small = (std::abs(term) < 1e-14 * std::abs(s.value)) ? small + 1 : 0;
        if (small >= 2) break;
    }
    for (int n = s.terms + 1; n <= s.terms + 3; ++n) {
        if (n == skip) continue;
        s.error = std::max(s.error, std::abs(f(n)));
    }
    return s;
}

const geometry::Interval& require_interval(const Body& body, const char* who) {
    const auto* iv = std::get_if<geometry::Interval>(&body.shape());
    if (!iv) throw DomainError(std::string(who) + ": body must be an interval");
    return *iv;
}

semigroup::HolderFunction covariance_holder(const CovarianceFn& cov) {
    semigroup::HolderFunction f;
    f.f = [cov](const Point& y) { return cov(y); };
    f.beta = 1.0;
    f.sup_norm = cov.body().volume();
    f.support_radius = cov.body().diam();
    if (cov.body().dimension() == 1) f.kinks = {-cov.body().diam(), 0.0, cov.body().diam()};
    return f;
}

// int_0^1 x (p_1(x) + p_1(-x)) dx
double inner_moment(const stable::SkewedStableParams& p) {
    auto h = [&](double x) { return x * (stable::density(p, x) + stable::density(p, -x)); };
    quad::Options o;
    o.rel_tol = 1e-13;
    o.abs_tol = 1e-300;
    auto r = quad::integrate(h, 0.0, 1.0, o);
    if (!r.converged) throw NumericError("expansion: inner moment quadrature did not converge", r.value, r.error);
    return r.value;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

Order Order::real(double v) {
    // continued fractions, denominators up to 1000
    long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = v;
    for (int it = 0; it < 40; ++it) {
        const double a = std::floor(x);
        if (std::abs(a) > 1e9) break;
        const long ai = static_cast<long>(a);
        const long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > 1000) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - v) < kOrderEps) return {h1, k1, v};
        const double frac = x - a;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    return {0, 0, v};
}

std::string Order::str() const {
    if (exact()) return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    return fmt(value);
}

bool same_order(const Order& a, const Order& b) {
    if (a.exact() && b.exact()) return a.num * b.den == b.num * a.den;
    return std::abs(a.value - b.value) < kOrderEps;
}

bool order_less(const Order& a, const Order& b) {
    if (a.exact() && b.exact()) return a.num * b.den < b.num * a.den;
    return a.value < b.value - kOrderEps;
}

double ExpansionSeries::partial_sum(double t, std::size_t n_terms) const {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(n_terms, terms.size()); ++i) {
        const auto& term = terms[i];
        double v = term.coefficient * std::pow(t, term.order.value);
        if (term.log_power) v *= std::pow(std::log(1.0 / t), term.log_power);
        s += v;
    }
    return s;
}

SeriesSum a_series_sum(int d, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("a_series_sum: alpha must lie in (0, 1)");
    if (is_integer(1.0 / alpha)) throw DomainError("a_series_sum: 1/alpha is an integer");
    return truncated_sum([&](int n) { return stable::coeff_a(n, d, alpha) / (1.0 - n * alpha); });
}

Term stable_power_term(const Body& body, double alpha) {
    const int d = body.dimension();
    const auto S = a_series_sum(d, alpha);
    const double rmi = stable::radial_moment_integral(stable::IsotropicStableParams(alpha, d));
    const double per = CovarianceFn(body).perimeter();
    const double pref = per / geometry::perimeter_normalization(d);
    Term t;
    t.order = Order::real(1.0 / alpha);
    t.coefficient = pref * (rmi - S.value);
    t.error = std::abs(pref) * S.error;
    t.provenance = "power-term";
    return t;
}

ExpansionSeries stable_expansion(const Body& body, double alpha, int depth) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UnsupportedError("stable_expansion: requires alpha in (0, 1)");
    if (depth < 1) throw DomainError("stable_expansion: depth must be positive");
    const double inv = 1.0 / alpha;
    const bool log_case = is_integer(inv);
    const int K = log_case ? static_cast<int>(std::lround(inv)) - 1 : static_cast<int>(std::ceil(inv)) - 1;
    ExpansionSeries s;
    s.t_max = std::min(std::pow(body.diam(), alpha), std::exp(-1.0));
    s.description = "isotropic " + fmt(alpha) + "-stable, " + body.name();
    for (int k = 1; k <= std::min(depth, K); ++k) {
        Term t;
        t.order = Order::integer(k);
        t.coefficient = sign_pow(k - 1) / factorial(k) * heat::stable_perimeter(body, k * alpha);
        t.provenance = "perimeter-series " + std::to_string(k);
        s.terms.push_back(t);
    }
    if (depth > K) {
        if (log_case) {
            const int N = K + 1;
            Term t;
            t.order = Order::integer(N);
            t.log_power = 1;
            t.coefficient = sign_pow(N - 1) / (factorial(N - 1) * special::pi) * CovarianceFn(body).perimeter();
            t.provenance = "log-term";
            s.terms.push_back(t);
        } else {
            s.terms.push_back(stable_power_term(body, alpha));
        }
    }
    return s;
}

ExpansionSeries prop_expansion_1d(const Body& interval, const stable::SkewedStableParams& p, int depth) {
    const auto& iv = require_interval(interval, "prop_expansion_1d");
    if (depth < 1) throw DomainError("prop_expansion_1d: depth must be positive");
    const double L = iv.b - iv.a;
    const double alpha = p.alpha;
    ExpansionSeries s;
    s.t_max = std::min(std::pow(L, alpha), std::exp(-1.0));
    s.description = "skewed (" + fmt(alpha) + ", " + fmt(p.beta) + ")-stable, " + interval.name();
    auto power_coef = [&](int n) {
        return stable::coeff_d(n, alpha, p.beta) * std::pow(L, 1.0 - n * alpha) / (n * alpha * (1.0 - n * alpha));
    };
    auto add_power = [&](int n) {
        Term t;
        t.order = Order::integer(n);
        t.coefficient = power_coef(n);
        t.provenance = "interval-series " + std::to_string(n);
        s.terms.push_back(t);
    };
    if (alpha > 1.0) {
        if (std::abs(p.beta) == 1.0) throw UnsupportedError("prop_expansion_1d: |beta| = 1 with alpha > 1");
        s.t_max = std::numeric_limits<double>::infinity();
        Term lead;
        lead.order = Order::real(1.0 / alpha);
        lead.coefficient = stable::mean_abs(p);
        lead.provenance = "mean-abs";
        s.terms.push_back(lead);
        for (int n = 1; static_cast<int>(s.terms.size()) < depth; ++n) add_power(n);
        return s;
    }
    if (!(alpha > 0.0)) throw UnsupportedError("prop_expansion_1d: alpha must lie in (0, 1) or (1, 2)");
    const double inv = 1.0 / alpha;
    const bool log_case = is_integer(inv);
    const int N = log_case ? static_cast<int>(std::lround(inv)) : static_cast<int>(std::floor(inv));
    auto full = [&]() { return static_cast<int>(s.terms.size()) >= depth; };
    for (int n = 1; n <= N - (log_case ? 1 : 0) && !full(); ++n) add_power(n);
    if (!full()) {
        const double J = inner_moment(p);
        if (log_case) {
            const double dN = stable::coeff_d(N, alpha, p.beta);
            Term lg;
            lg.order = Order::integer(N);
            lg.log_power = 1;
            lg.coefficient = N * dN;
            lg.provenance = "log-term";
            s.terms.push_back(lg);
            if (!full()) {
                const auto S = truncated_sum([&](int n) { return stable::coeff_d(n, alpha, p.beta) / (1.0 - n * alpha); },
                                             N);
                Term c;
                c.order = Order::integer(N);
                c.coefficient = J - S.value + dN * (std::log(L) + 1.0);
                c.error = S.error;
                c.provenance = "log-companion";
                s.terms.push_back(c);
            }
        } else {
            const auto S = truncated_sum([&](int n) { return stable::coeff_d(n, alpha, p.beta) / (1.0 - n * alpha); });
            Term c;
            c.order = Order::real(inv);
            c.coefficient = J - S.value;
            c.error = S.error;
            c.provenance = "power-term";
            s.terms.push_back(c);
        }
    }
    for (int n = N + 1; !full(); ++n) add_power(n);
    return s;
}

ExpansionSeries compound_poisson_expansion(const Body& body, const levy::LevyMeasure& nu, int depth) {
    if (!nu.is_finite()) throw UnsupportedError("compound_poisson_expansion: needs a finite Levy measure");
    if (nu.dimension() != body.dimension()) throw DomainError("compound_poisson_expansion: dimension mismatch");
    const CovarianceFn cov(body);
    const auto f = covariance_holder(cov);
    const Point origin(body.dimension(), 0.0);
    ExpansionSeries s;
    s.t_max = std::numeric_limits<double>::infinity();
    s.description = "compound Poisson, " + body.name();
    for (int k = 1; k <= depth; ++k) {
        Term t;
        t.order = Order::integer(k);
        t.coefficient = -semigroup::generator_power_at(f, nu, k, origin).value / factorial(k);
        t.provenance = "compound-poisson " + std::to_string(k);
        s.terms.push_back(t);
    }
    return s;
}

double m_omega_diag(const Body& body, double alpha, double t, double r) {
    if (!(r > 0.0) || !(t > 0.0)) throw DomainError("m_omega_diag: r and t must be positive");
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("m_omega_diag: alpha must lie in (0, 2)");
    const CovarianceFn cov(body);
    const double rho = r * std::pow(t, 1.0 / alpha);
    return geometry::AngularDeficit(cov)(rho) / rho;
}

CompoundSeriesReport compound_poisson_partial_sums(const Body& body, const levy::LevyMeasure& nu, double t, int K) {
    if (!(t >= 0.0)) throw DomainError("compound_poisson_partial_sums: t must be nonnegative");
    if (K < 1) throw DomainError("compound_poisson_partial_sums: K must be positive");
    const auto series = compound_poisson_expansion(body, nu, K);
    const CovarianceFn cov(body);
    const auto pv = semigroup::compound_poisson_apply(nu, covariance_holder(cov), t, Point(body.dimension(), 0.0), 1e-17);
    CompoundSeriesReport rep;
    rep.t = t;
    rep.exact = body.volume() - pv.value;
    for (int k = 1; k <= K; ++k) {
        const double s = series.partial_sum(t, k);
        rep.partial.push_back(s);
        rep.rel_error.push_back(rep.exact != 0.0 ? std::abs(s - rep.exact) / std::abs(rep.exact) : std::abs(s));
    }
    return rep;
}

std::string limit_name(Limit l) {
    switch (l) {
        case Limit::FirstOrder: return "first-order";
        case Limit::PerimeterSeries: return "perimeter-series";
        case Limit::LogTerm: return "log-term";
        case Limit::PowerTerm: return "power-term";
        case Limit::MeanAbs: return "mean-abs";
    }
    return "?";
}

Limit parse_limit(const std::string& name) {
    for (Limit l : {Limit::FirstOrder, Limit::PerimeterSeries, Limit::LogTerm, Limit::PowerTerm, Limit::MeanAbs})
        if (limit_name(l) == name) return l;
    throw ConfigError("unknown limit '" + name +
                      "' (expected first-order, perimeter-series, log-term, power-term or mean-abs)");
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

double default_tolerance(Limit l) {
    switch (l) {
        case Limit::FirstOrder: return 0.01;
        case Limit::PerimeterSeries: return 0.02;
        case Limit::LogTerm: return 0.10;
        case Limit::PowerTerm: return 0.05;
        case Limit::MeanAbs: return 0.03;
    }
    return 0.01;
}

namespace {

struct Model {
    ExpansionSeries series;
    std::vector<std::pair<Order, int>> orders;  // candidate (exponent, log power) pairs, ascending
    bool prop_domain = false;                   // enforce t < t_max
};

// Orders present in H(t) for the drivers handled here: integers, and 1/alpha
// for stable drivers (log(1/t) t^N together with t^N when 1/alpha = N).
std::vector<std::pair<Order, int>> candidate_orders(double alpha, int max_n) {
    std::vector<std::pair<Order, int>> out;
    for (int n = 1; n <= max_n; ++n) out.push_back({Order::integer(n), 0});
    if (alpha > 0.0) {
        const Order o = Order::real(1.0 / alpha);
        if (is_integer(1.0 / alpha)) {
            out.push_back({o, 1});
        } else {
            out.push_back({o, 0});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (same_order(a.first, b.first)) return a.second > b.second;
        return order_less(a.first, b.first);
    });
    return out;
}

bool before(const std::pair<Order, int>& a, const std::pair<Order, int>& b) {
    if (same_order(a.first, b.first)) return a.second > b.second;
    return order_less(a.first, b.first);
}

int model_depth(Limit l, int n) {
    switch (l) {
        case Limit::FirstOrder: return 1;
        case Limit::PerimeterSeries: return n;
        case Limit::MeanAbs: return 2;
        default: return 64;  // truncated by the series itself
    }
}

Model build_model(const VerifyRequest& req) {
    Model m;
    const int depth = model_depth(req.limit, req.n);
    if (const auto* nu = std::get_if<levy::LevyMeasure>(&req.driver)) {
        if (req.limit != Limit::FirstOrder && req.limit != Limit::PerimeterSeries)
            throw UnsupportedError("verify: finite measures have only integer orders");
        m.series = compound_poisson_expansion(req.body, *nu, depth);
        m.orders = candidate_orders(0.0, depth + 8);
        return m;
    }
    stable::SkewedStableParams skewed;
    bool use_prop = false;
    double alpha = 0.0;
    if (const auto* p = std::get_if<stable::IsotropicStableParams>(&req.driver)) {
        alpha = p->alpha;
        if (p->d != req.body.dimension()) throw DomainError("verify: driver and body dimensions differ");
        if (alpha > 1.0) {
            if (p->d != 1) throw UnsupportedError("verify: alpha > 1 needs a 1-D driver");
            skewed = stable::SkewedStableParams(alpha, 0.0);
            use_prop = true;
        }
    } else {
        skewed = std::get<stable::SkewedStableParams>(req.driver);
        alpha = skewed.alpha;
        use_prop = true;
        if (req.body.dimension() != 1) throw DomainError("verify: skewed driver needs a 1-D body");
    }
    if (req.limit == Limit::MeanAbs && alpha < 1.0) throw UnsupportedError("verify: mean-abs needs alpha > 1");
    if (req.limit != Limit::MeanAbs && alpha > 1.0)
        throw UnsupportedError("verify: alpha > 1 supports only the mean-abs limit");
    if (use_prop) {
        m.series = prop_expansion_1d(req.body, skewed, req.limit == Limit::MeanAbs ? 2 : depth);
        m.prop_domain = alpha < 1.0;
    } else {
        m.series = stable_expansion(req.body, alpha, depth);
    }
    m.orders = candidate_orders(alpha, 12);
    return m;
}

std::size_t target_index(const Model& m, const VerifyRequest& req) {
    const auto& terms = m.series.terms;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        switch (req.limit) {
            case Limit::FirstOrder:
                if (same_order(t.order, Order::integer(1)) && t.log_power == 0) return i;
                break;
            case Limit::PerimeterSeries:
                if (same_order(t.order, Order::integer(req.n)) && t.log_power == 0) return i;
                break;
            case Limit::LogTerm:
                if (t.log_power == 1) return i;
                break;
            case Limit::PowerTerm:
                if (t.provenance == "power-term") return i;
                break;
            case Limit::MeanAbs:
                if (same_order(t.order, Order::integer(1))) return i;
                break;
        }
    }
    throw UnsupportedError("verify: the expansion has no term for limit " + limit_name(req.limit) +
                           (req.limit == Limit::PerimeterSeries ? " n=" + std::to_string(req.n) : ""));
}

std::string basis_label(double e, int l) {
    std::string s;
    if (std::abs(e) > kOrderEps) s = "t^" + fmt(e);
    if (l != 0) s += (s.empty() ? "" : " ") + std::string("log(1/t)^") + std::to_string(l);
    return s.empty() ? "1" : s;
}

struct FitOut {
    double c0;
    double se0;
    std::vector<double> coef;
};

FitOut fit(const std::vector<double>& t, const std::vector<double>& y, const std::vector<std::pair<double, int>>& basis,
           std::size_t K, std::size_t first) {
    std::vector<std::vector<double>> cols;
    cols.emplace_back(t.size() - first, 1.0);
    for (std::size_t j = 0; j < K; ++j) {
        std::vector<double> c;
        for (std::size_t i = first; i < t.size(); ++i)
            c.push_back(std::pow(t[i], basis[j].first) * std::pow(std::log(1.0 / t[i]), basis[j].second));
        cols.push_back(std::move(c));
    }
    const std::vector<double> ys(y.begin() + static_cast<long>(first), y.end());
    const auto f = extrap::least_squares(cols, ys);
    return {f.coef[0], f.stderr_.empty() ? 0.0 : f.stderr_[0], f.coef};
}

}  // namespace

VerifyReport verify_limit(const VerifyRequest& req) {
    if (req.t.size() < 3) throw DomainError("verify: need at least three t values");
    std::vector<double> t = req.t;
    std::sort(t.begin(), t.end());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0) || !std::isfinite(t[i])) throw DomainError("verify: t values must be positive");
        if (i > 0 && t[i] == t[i - 1]) throw DomainError("verify: repeated t value");
    }
    const Model model = build_model(req);
    if (model.prop_domain && t.back() >= model.series.t_max)
        throw DomainError("verify: t grid must stay below min(|Omega|^alpha, 1/e) = " + fmt(model.series.t_max));
    const std::size_t ti = target_index(model, req);
    const Term& target = model.series.terms[ti];
    const double e0 = target.order.value;
    const int l0 = target.log_power;
    if (l0 > 0 && t.back() >= 1.0) throw DomainError("verify: log-normalized limits need t < 1");

    VerifyReport rep;
    rep.limit = limit_name(req.limit) + (req.limit == Limit::PerimeterSeries ? " n=" + std::to_string(req.n) : "");
    rep.t = t;
    rep.target = target.coefficient;
    rep.target_error = target.error;
    rep.tolerance = req.tolerance > 0.0 ? req.tolerance : default_tolerance(req.limit);

    heat::HeatContentRequest hr{req.body, req.driver, t};
    hr.method = req.engine == Engine::Exact1D ? heat::Method::Exact1D : heat::Method::Quadrature;
    hr.rel_tol = req.rel_tol;
    hr.threads = req.threads;
    const auto H = heat::heat_content(hr);
    rep.H = H.H;
    rep.H_error = H.error;

    std::vector<double> rem;
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::vector<double> ps;
        for (std::size_t k = 1; k <= model.series.terms.size(); ++k) ps.push_back(model.series.partial_sum(t[i], k));
        rep.partial_sums.push_back(ps);
        const double sub = model.series.partial_sum(t[i], ti);
        const double scale = std::pow(t[i], e0) * std::pow(std::log(1.0 / t[i]), l0);
        rep.residual.push_back(rep.H[i] - sub);
        rep.normalized.push_back(rep.residual.back() / scale);
        rem.push_back(rep.residual.back() - target.coefficient * scale);
    }
    rep.remainder_slope = extrap::loglog_slope(t, rem);

    // correction basis relative to the target scale
    std::vector<std::pair<double, int>> basis;
    const std::pair<Order, int> tkey{target.order, l0};
    if (l0 > 0) basis.push_back({0.0, -l0});  // pure t^N companion of the log term
    for (const auto& o : model.orders)
        if (before(tkey, o) && !(same_order(o.first, target.order) && o.second == 0 && l0 > 0))
            basis.push_back({o.first.value - e0, o.second - l0});
    const std::size_t np = t.size();
    std::size_t K = std::min<std::size_t>(static_cast<std::size_t>(std::max(req.corrections, 0)), basis.size());
    K = std::min(K, np >= 3 ? np - 3 : 0);  // keep room for the one-point-dropped refit

    rep.fit_basis.push_back("1");
    for (std::size_t j = 0; j < K; ++j) rep.fit_basis.push_back(basis_label(basis[j].first, basis[j].second));
    const FitOut full = fit(t, rep.normalized, basis, K, 0);
    rep.fit_coef = full.coef;
    rep.extrapolated = full.c0;
    // error: refit without the largest t, and with one correction fewer
    const FitOut dropped = fit(std::vector<double>(t.begin(), t.end() - 1),
                               std::vector<double>(rep.normalized.begin(), rep.normalized.end() - 1), basis, K, 0);
    double err = std::max(std::abs(full.c0 - dropped.c0), 2.0 * full.se0);
    if (K >= 2) err = std::max(err, std::abs(full.c0 - fit(t, rep.normalized, basis, K - 1, 0).c0));
    rep.extrapolation_error = err + target.error;

    const double scale = std::max(std::abs(rep.target), 1e-300);
    rep.rel_error = std::abs(rep.extrapolated - rep.target) / scale;
    std::ostringstream diag;
    diag << "fit on " << np << " points with " << K << " correction term(s); remainder log-log slope "
         << fmt(rep.remainder_slope);
    if (rep.extrapolation_error > rep.tolerance * scale) {
        rep.verdict = Verdict::Inconclusive;
        diag << "; extrapolation error " << fmt(rep.extrapolation_error) << " exceeds tolerance "
             << fmt(rep.tolerance * scale) << " (noise floor or insufficient decay on this grid)";
    } else {
        rep.verdict = rep.rel_error <= rep.tolerance ? Verdict::Pass : Verdict::Fail;
    }
    rep.diagnostics = diag.str();
    return rep;
}

}  // namespace nlheat::expansion
