#include "nlheat/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>

#include "nlheat/errors.hpp"
#include "nlheat/extrapolation.hpp"
#include "nlheat/geometry.hpp"
#include "nlheat/quadrature.hpp"
#include "nlheat/special.hpp"
#include "nlheat/stable.hpp"

namespace nlheat::semigroup {

using levy::LevyMeasure;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double norm(const Point& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

Point shifted(const Point& x, const Point& u, double r) {
    Point y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + r * u[k];
    return y;
}

quad::Options opts(double tol) {
    quad::Options o;
    o.abs_tol = tol;
    o.rel_tol = tol;
    o.max_intervals = 20000;
    return o;
}

template <class R>
void accumulate(Value& v, const R& res, bool& ok) {
    v.value += res.value;
    v.error += res.error;
    v.evaluations += res.evaluations;
    ok = ok && res.converged;
}

// int_0^inf w(r) F(r) dr where w(r) ~ r^{-1-alpha} near 0; F(r) = 0-increment
// near 0. breaks > 0 are points of non-smoothness; beyond `outer` the integrand
// equals tail_integrand and its integral is tail (closed form) when finite.
// int_0^inf h(r) dr with h ~ r^{beta - 1 - alpha} near 0. breaks > 0 are
// points of non-smoothness; beyond `outer` the integral is `tail` (closed
// form). When start > 0 the range (0, start) is excluded (handled by the
// caller's local model) and the first panel is integrated in log r.
Value radial_integral(const std::function<double(double)>& h, std::vector<double> breaks, double outer,
                      double tail, double tol, double start = 0.0) {
    Value v;
    bool ok = true;
    breaks.push_back(1.0);
    if (std::isfinite(outer)) breaks.push_back(outer);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                                [&](double b) { return !(b > start) || (std::isfinite(outer) && b > outer); }),
                 breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    if (start > 0.0)
        accumulate(v, quad::integrate_log(h, start, breaks.front(), opts(tol)), ok);
    else
        accumulate(v, quad::integrate_from_zero(h, breaks.front(), opts(tol)), ok);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i], b = breaks[i + 1];
        if (b / a > 8.0)
            accumulate(v, quad::integrate_log(h, a, b, opts(tol)), ok);
        else
            accumulate(v, quad::integrate(h, a, b, opts(tol)), ok);
    }
    if (std::isfinite(outer))
        v.value += tail;
    else
        accumulate(v, quad::integrate_to_infinity(h, breaks.back(), opts(tol)), ok);
    if (!ok) throw NumericError("generator: quadrature did not converge", v.value, v.error);
    return v;
}

// Near r = 0 the increment D(r) = f(x + r u) - f(x) is swamped by rounding
// (or by the inner error of a lifted f) once weighted by r^{-1-alpha}. Below
// r0 we fit D(r) = a r^beta + b r^p from D(r0), D(r0/2) and integrate the
// model exactly; the model is exact for piecewise-linear f.
struct LocalModel {
    double r0 = 0.0;
    double p = 2.0;
};

LocalModel local_model(double beta, double first_break, double fx, double tol) {
    LocalModel m;
    const double noise = std::max(4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx)), 0.01 * tol);
    m.r0 = std::min(0.1 * first_break, std::sqrt(noise));
    m.p = beta <= 0.9 ? 1.0 : beta + 1.0;
    return m;
}

// int_0^{r0} D(r) r^{-1-alpha} dr under the two-term model
double model_integral(const std::function<double(double)>& D, double alpha, double beta, const LocalModel& m) {
    const double r0 = m.r0, p = m.p;
    const double d1 = D(r0), d2 = D(0.5 * r0);
    // [r0^beta, r0^p; (r0/2)^beta, (r0/2)^p] [a; b] = [d1; d2], scaled by r0
    const double sb = std::pow(0.5, beta), sp = std::pow(0.5, p);
    const double det = sp - sb;
    const double A = (d1 * sp - d2) / det;  // a r0^beta
    const double B = (d2 - d1 * sb) / det;  // b r0^p
    return std::pow(r0, -alpha) * (A / (beta - alpha) + B / (p - alpha));
}

// Stable Levy densities per side in 1-D.
bool one_dim_stable(const LevyMeasure& nu, double& cp, double& cm, double& alpha) {
    if (const auto* m = std::get_if<levy::IsotropicStable>(&nu.family()); m && m->d == 1) {
        cp = cm = special::stable_constant(1, m->alpha);
        alpha = m->alpha;
        return true;
    }
    if (const auto* m = std::get_if<levy::OneDimStable>(&nu.family())) {
        const stable::SkewedStableParams p(m->alpha, m->beta);
        cp = p.c_plus();
        cm = p.c_minus();
        alpha = m->alpha;
        return true;
    }
    return false;
}

std::vector<double> kink_distances(const HolderFunction& f, double x) {
    std::vector<double> out;
    for (double k : f.kinks) {
        const double d = std::abs(k - x);
        if (d > 0.0) out.push_back(d);
    }
    return out;
}

struct PointCache {
    std::mutex m;
    std::map<Point, double> values;
};

}  // namespace

HolderFunction interval_covariance(double length) {
    if (!(length > 0.0)) throw DomainError("interval_covariance: length must be positive");
    HolderFunction h;
    h.f = [length](const Point& x) { return std::max(0.0, length - std::abs(x[0])); };
    h.beta = 1.0;
    h.sup_norm = length;
    h.holder_const = 1.0;
    h.kinks = {-length, 0.0, length};
    h.support_radius = length;
    return h;
}

HolderCheck estimate_holder(const HolderFunction& f, int d, double radius, long pairs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    HolderCheck out{0.0, 0.0};
    Point x(d), y(d);
    for (long i = 0; i < pairs; ++i) {
        double dist2 = 0.0;
        for (int k = 0; k < d; ++k) {
            x[k] = radius * unif(rng);
            y[k] = x[k] + unif(rng) / std::sqrt(static_cast<double>(d));
            dist2 += (y[k] - x[k]) * (y[k] - x[k]);
        }
        const double fx = f(x), fy = f(y);
        out.sup_abs = std::max({out.sup_abs, std::abs(fx), std::abs(fy)});
        if (dist2 > 0.0) out.max_ratio = std::max(out.max_ratio, std::abs(fx - fy) / std::pow(dist2, 0.5 * f.beta));
    }
    return out;
}

Value generator_apply(const HolderFunction& f, const LevyMeasure& nu, const Point& x, double tol) {
    const int d = nu.dimension();
    if (static_cast<int>(x.size()) != d) throw DomainError("generator_apply: dimension mismatch");
    const double fx = f(x);

    if (const auto* m = std::get_if<levy::FiniteAtomic>(&nu.family())) {
        Value v;
        for (const auto& a : m->atoms) v.value += a.mass * (f(shifted(x, a.location, 1.0)) - fx);
        v.evaluations = static_cast<long>(m->atoms.size()) + 1;
        return v;
    }

    const double alpha = nu.stable_index();
    if (std::isfinite(alpha) && !(f.beta > alpha))
        throw DomainError("generator_apply: need Holder exponent beta > alpha for integrability");

    // f(x + y) = 0 for |y| > outer
    const double outer = f.support_radius + norm(x);

    double cp = 0.0, cm = 0.0, a1 = 0.0;
    if (one_dim_stable(nu, cp, cm, a1)) {
        auto D = [&](double y) { return cp * (f({x[0] + y}) - fx) + cm * (f({x[0] - y}) - fx); };
        auto h = [&](double y) { return D(y) * std::pow(y, -1.0 - a1); };
        const double tail = -fx * (cp + cm) * std::pow(outer, -a1) / a1;
        const auto br = kink_distances(f, x[0]);
        const double first = std::min({1.0, outer, br.empty() ? 1.0 : *std::min_element(br.begin(), br.end())});
        const LocalModel lm = local_model(f.beta, first, fx, tol);
        // each side has its own exponent structure; fit them separately
        auto Dp = [&](double y) { return cp * (f({x[0] + y}) - fx); };
        auto Dm = [&](double y) { return cm * (f({x[0] - y}) - fx); };
        Value v = radial_integral(h, br, outer, tail, tol, lm.r0);
        v.value += model_integral(Dp, a1, f.beta, lm) + model_integral(Dm, a1, f.beta, lm);
        return v;
    }

    if (const auto* rd = std::get_if<levy::RadialDensity>(&nu.family()); rd && d == 1) {
        auto h = [&](double y) { return rd->profile(y) * ((f({x[0] + y}) - fx) + (f({x[0] - y}) - fx)); };
        std::vector<double> br = kink_distances(f, x[0]);
        if (std::isfinite(rd->support_radius)) br.push_back(rd->support_radius);
        const double tail = std::isfinite(outer) ? -fx * nu.tail_mass(outer) : 0.0;
        return radial_integral(h, br, outer, tail, tol);
    }

    // d >= 2, radial measures: sphere rule in the angular variable
    const auto rule = geometry::sphere_rule(d);
    auto sphere = [&](double r) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * (f(shifted(x, rule.nodes[i], r)) - fx);
        return s;
    };
    if (const auto* st = std::get_if<levy::IsotropicStable>(&nu.family())) {
        const double A = special::stable_constant(d, st->alpha);
        auto h = [&](double r) { return A * std::pow(r, -1.0 - st->alpha) * sphere(r); };
        const double tail = -fx * nu.tail_mass(outer);
        const LocalModel lm = local_model(f.beta, std::min(1.0, outer), fx, tol);
        Value v = radial_integral(h, {}, outer, tail, tol, lm.r0);
        v.value += model_integral([&](double r) { return A * sphere(r); }, st->alpha, f.beta, lm);
        return v;
    }
    if (const auto* rd = std::get_if<levy::RadialDensity>(&nu.family())) {
        auto h = [&](double r) { return rd->profile(r) * std::pow(r, d - 1) * sphere(r); };
        std::vector<double> br;
        if (std::isfinite(rd->support_radius)) br.push_back(rd->support_radius);
        const double tail = std::isfinite(outer) ? -fx * nu.tail_mass(outer) : 0.0;
        return radial_integral(h, br, outer, tail, tol);
    }
    throw UnsupportedError("generator_apply: unsupported measure family");
}

double AtomicMeasure::apply(const HolderFunction& f, const Point& x) const {
    double s = 0.0;
    for (const auto& [z, w] : atoms) s += w * f(shifted(x, z, 1.0));
    return s;
}

double AtomicMeasure::total_variation() const {
    double s = 0.0;
    for (const auto& [z, w] : atoms) s += std::abs(w);
    return s;
}

AtomicMeasure convolve(const AtomicMeasure& a, const AtomicMeasure& b, double prune_mass, std::size_t max_atoms) {
    AtomicMeasure out;
    out.pruned_mass = a.pruned_mass + b.pruned_mass;
    for (const auto& [za, wa] : a.atoms)
        for (const auto& [zb, wb] : b.atoms) {
            out.atoms[shifted(za, zb, 1.0)] += wa * wb;
            if (out.atoms.size() > max_atoms)
                throw ResourceError("convolve: atom count exceeds budget; increase the series tolerance");
        }
    if (prune_mass > 0.0) {
        std::vector<std::pair<double, Point>> by_mass;
        for (const auto& [z, w] : out.atoms) by_mass.emplace_back(std::abs(w), z);
        std::sort(by_mass.begin(), by_mass.end());
        double dropped = 0.0;
        for (const auto& [w, z] : by_mass) {
            if (dropped + w > prune_mass) break;
            dropped += w;
            out.atoms.erase(z);
        }
        out.pruned_mass += dropped;
    }
    return out;
}

AtomicMeasure from_levy(const LevyMeasure& nu) {
    const auto* m = std::get_if<levy::FiniteAtomic>(&nu.family());
    if (!m) throw UnsupportedError("from_levy: measure is not finite atomic");
    AtomicMeasure out;
    for (const auto& a : m->atoms) out.atoms[a.location] += a.mass;
    return out;
}

Value generator_power_at(const HolderFunction& f, const LevyMeasure& nu, int k, const Point& x, double tol) {
    if (k < 1) throw DomainError("generator_power_at: k must be >= 1");
    if (nu.is_finite()) {
        // (nu - |nu| delta_0)^{*k}
        AtomicMeasure step = from_levy(nu);
        step.atoms[Point(nu.dimension(), 0.0)] -= nu.total_mass();
        AtomicMeasure acc = step;
        for (int j = 1; j < k; ++j) acc = convolve(acc, step);
        Value v;
        v.value = acc.apply(f, x);
        v.error = 1e-15 * acc.total_variation() * (std::isfinite(f.sup_norm) ? f.sup_norm : 1.0);
        v.evaluations = static_cast<long>(acc.atoms.size());
        return v;
    }
    const double alpha = nu.stable_index();
    if (std::isfinite(alpha) && !(f.beta > k * alpha))
        throw DomainError("generator_power_at: need Holder exponent beta > k alpha for integrability");
    // lift f through L^{k-1} with memoized inner evaluations
    HolderFunction cur = f;
    for (int j = 1; j < k; ++j) {
        auto cache = std::make_shared<PointCache>();
        HolderFunction prev = cur;
        HolderFunction next;
        next.beta = prev.beta - (std::isfinite(alpha) ? alpha : 0.0);
        next.kinks = prev.kinks;
        next.f = [prev, cache, &nu, tol](const Point& y) {
            {
                std::lock_guard<std::mutex> lock(cache->m);
                auto it = cache->values.find(y);
                if (it != cache->values.end()) return it->second;
            }
            // points next to a kink are ill-conditioned; keep the best estimate
            double v;
            try {
                v = generator_apply(prev, nu, y, 0.1 * tol).value;
            } catch (const NumericError& e) {
                v = e.partial();
            }
            std::lock_guard<std::mutex> lock(cache->m);
            cache->values.emplace(y, v);
            return v;
        };
        cur = next;
    }
    Value v = generator_apply(cur, nu, x, tol);
    v.error += tol * k * std::abs(v.value);
    return v;
}

PoissonValue compound_poisson_apply(const LevyMeasure& nu, const HolderFunction& f, double t, const Point& x,
                                    double series_tol) {
    if (!nu.is_finite()) throw UnsupportedError("compound_poisson_apply: measure must be finite");
    if (t < 0.0) throw DomainError("compound_poisson_apply: t must be nonnegative");
    if (!(series_tol > 0.0)) throw DomainError("compound_poisson_apply: series_tol must be positive");
    if (t == 0.0) return {f(x), 0, 0.0};
    const double m = nu.total_mass();
    const double lam = t * m;
    // smallest N with P(Poisson(lam) > N) < series_tol / 2, using the
    // geometric bound on the tail (1 - cdf loses all digits near 1e-16)
    std::vector<double> pmf{std::exp(-lam)};
    auto tail_after = [&](double n, double p) {
        const double q = lam / (n + 2.0);
        return q < 1.0 ? p * lam / (n + 1.0) / (1.0 - q) : std::numeric_limits<double>::infinity();
    };
    while (tail_after(static_cast<double>(pmf.size() - 1), pmf.back()) >= 0.5 * series_tol && pmf.size() < 100000) {
        const double n = static_cast<double>(pmf.size());
        pmf.push_back(pmf.back() * lam / n);
    }
    const int N = static_cast<int>(pmf.size()) - 1;
    const double omitted = tail_after(N, pmf.back());
    AtomicMeasure jump = from_levy(nu);
    for (auto& [z, w] : jump.atoms) w /= m;
    AtomicMeasure cur;
    cur.atoms[Point(nu.dimension(), 0.0)] = 1.0;
    double value = pmf[0] * f(x);
    const double prune = 0.5 * series_tol / (N + 1);
    for (int n = 1; n <= N; ++n) {
        cur = convolve(cur, jump, prune);
        value += pmf[n] * cur.apply(f, x);
    }
    const double sup = std::isfinite(f.sup_norm) ? f.sup_norm : 1.0;
    return {value, N, (omitted + cur.pruned_mass) * sup};
}

McValue semigroup_apply_mc(const HolderFunction& f, const Driver& driver, double t, const Point& x, long n,
                           std::uint64_t seed) {
    if (n < 1000) throw DomainError("semigroup_apply_mc: need at least 1000 samples");
    if (t < 0.0) throw DomainError("semigroup_apply_mc: t must be nonnegative");
    if (t == 0.0) return {f(x), 0.0};
    std::mt19937_64 rng(seed);
    double sum = 0.0, sum2 = 0.0;
    auto add = [&](double v) {
        sum += v;
        sum2 += v * v;
    };
    std::visit(overloaded{[&](const stable::IsotropicStableParams& p) {
                              if (static_cast<int>(x.size()) != p.d) throw DomainError("semigroup_apply_mc: dimension");
                              for (const auto& y : stable::sample(p, t, rng, n)) add(f(shifted(x, y, 1.0)));
                          },
                          [&](const stable::SkewedStableParams& p) {
                              if (x.size() != 1) throw DomainError("semigroup_apply_mc: dimension");
                              for (double y : stable::sample(p, t, rng, n)) add(f({x[0] + y}));
                          },
                          [&](const LevyMeasure& nu) {
                              const auto* m = std::get_if<levy::FiniteAtomic>(&nu.family());
                              if (!m) throw UnsupportedError("semigroup_apply_mc: only finite measures sample exactly");
                              std::vector<double> w;
                              for (const auto& a : m->atoms) w.push_back(a.mass);
                              std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
                              std::poisson_distribution<long> count(t * nu.total_mass());
                              Point y(x.size());
                              for (long i = 0; i < n; ++i) {
                                  y = x;
                                  const long jumps = count(rng);
                                  for (long j = 0; j < jumps; ++j) {
                                      const auto& z = m->atoms[pick(rng)].location;
                                      for (std::size_t k = 0; k < y.size(); ++k) y[k] += z[k];
                                  }
                                  add(f(y));
                              }
                          }},
               driver);
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    const double var = std::max(0.0, sum2 / dn - mean * mean) * dn / (dn - 1.0);
    return {mean, std::sqrt(var / dn)};
}

Value semigroup_apply_quadrature(const HolderFunction& f, const Driver& driver, double t, double x, double tol) {
    if (t < 0.0) throw DomainError("semigroup_apply_quadrature: t must be nonnegative");
    if (t == 0.0) return {f({x}), 0.0, 1};
    std::function<double(double)> p1;
    double alpha = 0.0;
    if (const auto* p = std::get_if<stable::IsotropicStableParams>(&driver); p && p->d == 1) {
        const stable::IsotropicStableParams q = *p;
        p1 = [q](double z) { return stable::density(q, z); };
        alpha = q.alpha;
    } else if (const auto* p = std::get_if<stable::SkewedStableParams>(&driver)) {
        const stable::SkewedStableParams q = *p;
        p1 = [q](double z) { return stable::density(q, z); };
        alpha = q.alpha;
    } else {
        throw UnsupportedError("semigroup_apply_quadrature: needs a 1-D stable driver");
    }
    const double s = std::pow(t, 1.0 / alpha);
    auto h = [&](double z) { return f({x + s * z}) * p1(z); };
    std::vector<double> br{0.0};
    for (double k : f.kinks) br.push_back((k - x) / s);
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    if (std::isfinite(f.support_radius)) {
        lo = (-f.support_radius - x) / s;
        hi = (f.support_radius - x) / s;
    }
    Value v;
    bool ok = true;
    // positive and negative half-lines separately, each in log scale away from 0
    auto side = [&](double sign, double end) {
        std::vector<double> pts;
        for (double b : br)
            if (sign * b > 0.0 && sign * b < end) pts.push_back(sign * b);
        pts.push_back(1.0);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        while (!pts.empty() && pts.back() >= end) pts.pop_back();
        auto g = [&](double u) { return h(sign * u); };
        double a = 0.0;
        for (double b : pts) {
            if (a == 0.0)
                accumulate(v, quad::integrate(g, 0.0, b, opts(tol)), ok);
            else
                accumulate(v, b / a > 8.0 ? quad::integrate_log(g, a, b, opts(tol)) : quad::integrate(g, a, b, opts(tol)),
                           ok);
            a = b;
        }
        if (std::isfinite(end)) {
            if (end > a)
                accumulate(v, (a > 0.0 && end / a > 8.0) ? quad::integrate_log(g, a, end, opts(tol)) : quad::integrate(g, a, end, opts(tol)),
                           ok);
        } else {
            accumulate(v, quad::integrate_to_infinity(g, a, opts(tol)), ok);
        }
    };
    side(1.0, hi);
    side(-1.0, -lo);
    if (!ok) throw NumericError("semigroup_apply_quadrature: quadrature did not converge", v.value, v.error);
    return v;
}

TaylorReport taylor_remainder(const HolderFunction& f, const LevyMeasure& nu, const Driver& driver,
                              const std::vector<double>& t_grid, int n, const Point& x) {
    if (n < 1) throw DomainError("taylor_remainder: n must be >= 1");
    if (t_grid.size() < 3) throw DomainError("taylor_remainder: need at least 3 grid points");
    TaylorReport rep;
    std::vector<double> lk(n + 1);
    lk[0] = f(x);
    for (int k = 1; k <= n; ++k) lk[k] = generator_power_at(f, nu, k, x).value;
    rep.target = lk[n] / std::tgamma(n + 1.0);
    for (double t : t_grid) {
        if (!(t > 0.0)) throw DomainError("taylor_remainder: t must be positive");
        double pt = 0.0, err = 0.0;
        if (nu.is_finite()) {
            auto pv = compound_poisson_apply(nu, f, t, x, 1e-16);
            pt = pv.value;
            err = pv.tail_bound;
        } else if (x.size() == 1 && (std::holds_alternative<stable::SkewedStableParams>(driver) ||
                                     std::get<stable::IsotropicStableParams>(driver).d == 1)) {
            auto qv = semigroup_apply_quadrature(f, driver, t, x[0]);
            pt = qv.value;
            err = qv.error;
        } else {
            auto mc = semigroup_apply_mc(f, driver, t, x, 1000000, 12345);
            pt = mc.value;
            err = mc.stderr_;
        }
        double partial = 0.0;
        for (int k = 0; k < n; ++k) partial += std::pow(t, k) / std::tgamma(k + 1.0) * lk[k];
        rep.t.push_back(t);
        rep.remainder.push_back((pt - partial) / std::pow(t, n));
        rep.error.push_back(err / std::pow(t, n));
    }
    // order by decreasing t for the extrapolation
    std::vector<std::size_t> idx(rep.t.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rep.t[a] > rep.t[b]; });
    std::vector<double> ts, rs;
    for (auto i : idx) {
        ts.push_back(rep.t[i]);
        rs.push_back(rep.remainder[i]);
    }
    extrap::Estimate est;
    if (nu.is_finite()) {
        const std::vector<double> ex{1.0, 2.0};
        est = extrap::richardson(ts, rs, ex);
    } else {
        est = extrap::aitken_limit(rs);
    }
    rep.extrapolated = est.value;
    rep.extrapolation_error = est.error;
    return rep;
}

}  // namespace nlheat::semigroup
