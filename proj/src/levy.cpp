#include "nlheat/levy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlheat/errors.hpp"
#include "nlheat/quadrature.hpp"
#include "nlheat/special.hpp"

namespace nlheat::levy {

using special::pi;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

quad::Options tight() {
    quad::Options o;
    o.abs_tol = 1e-15;
    o.rel_tol = 1e-12;
    return o;
}

// Spherical average of cos(<xi, z>) for |xi| |z| = x in R^d.
double spherical_cos_mean(int d, double x) {
    if (d == 1) return std::cos(x);
    if (x < 1e-8) return 1.0 - x * x / (2.0 * d);
    const double nu = 0.5 * d - 1.0;
    return special::gamma(0.5 * d) * std::pow(2.0 / x, nu) * std::cyl_bessel_j(nu, x);
}

}  // namespace

LevyMeasure::LevyMeasure(Family family) : family_(std::move(family)) {
    std::visit(overloaded{
                   [&](const IsotropicStable& m) {
                       if (!(m.alpha > 0.0 && m.alpha < 2.0))
                           throw DomainError("isotropic stable measure: alpha must lie in (0, 2)");
                       if (m.d < 1) throw DomainError("isotropic stable measure: dimension must be >= 1");
                       dim_ = m.d;
                   },
                   [&](const OneDimStable& m) {
                       stable::SkewedStableParams check(m.alpha, m.beta);
                       dim_ = 1;
                   },
                   [&](const FiniteAtomic& m) {
                       if (m.atoms.empty()) throw DomainError("finite atomic measure: no atoms");
                       dim_ = static_cast<int>(m.atoms.front().location.size());
                       if (dim_ < 1) throw DomainError("finite atomic measure: empty location");
                       for (const auto& a : m.atoms) {
                           if (static_cast<int>(a.location.size()) != dim_)
                               throw DomainError("finite atomic measure: inconsistent atom dimensions");
                           if (!(a.mass > 0.0) || !std::isfinite(a.mass))
                               throw DomainError("finite atomic measure: masses must be positive and finite");
                           if (norm(a.location) == 0.0) throw DomainError("finite atomic measure: atom at the origin");
                       }
                   },
                   [&](const RadialDensity& m) {
                       if (m.d < 1) throw DomainError("radial density: dimension must be >= 1");
                       if (!m.profile) throw DomainError("radial density: missing profile");
                       dim_ = m.d;
                       const double w = special::sphere_area(m.d);
                       auto near = [&](double r) { return w * r * m.profile(r) * std::pow(r, m.d - 1); };
                       auto far = [&](double r) { return w * m.profile(r) * std::pow(r, m.d - 1); };
                       const double cut = std::min(1.0, m.support_radius);
                       auto a = quad::integrate_from_zero(near, cut, tight());
                       double total = a.value;
                       bool ok = a.converged && std::isfinite(a.value);
                       if (m.support_radius > 1.0) {
                           auto b = std::isfinite(m.support_radius)
                                        ? quad::integrate(far, 1.0, m.support_radius, tight())
                                        : quad::integrate_to_infinity(far, 1.0, tight());
                           total += b.value;
                           ok = ok && b.converged && std::isfinite(b.value);
                       }
                       if (!ok || total < 0.0)
                           throw NumericError("radial density: int (1 ^ |z|) nu(dz) does not converge", total);
                   }},
               family_);
}

std::string LevyMeasure::name() const {
    std::ostringstream os;
    std::visit(overloaded{[&](const IsotropicStable& m) { os << "isotropic_stable(alpha=" << m.alpha << ",d=" << m.d << ")"; },
                          [&](const OneDimStable& m) { os << "one_dim_stable(alpha=" << m.alpha << ",beta=" << m.beta << ")"; },
                          [&](const FiniteAtomic& m) { os << "finite_atomic(" << m.atoms.size() << " atoms)"; },
                          [&](const RadialDensity& m) { os << "radial_density(" << m.label << ",d=" << m.d << ")"; }},
               family_);
    return os.str();
}

double LevyMeasure::total_mass() const {
    if (const auto* m = std::get_if<FiniteAtomic>(&family_)) {
        double s = 0.0;
        for (const auto& a : m->atoms) s += a.mass;
        return s;
    }
    if (const auto* m = std::get_if<RadialDensity>(&family_)) {
        const double w = special::sphere_area(m->d);
        auto f = [&](double r) { return w * m->profile(r) * std::pow(r, m->d - 1); };
        auto lo = quad::integrate_from_zero(f, std::min(1.0, m->support_radius), tight());
        double hi = 0.0;
        if (m->support_radius > 1.0)
            hi = (std::isfinite(m->support_radius) ? quad::integrate(f, 1.0, m->support_radius, tight())
                                                   : quad::integrate_to_infinity(f, 1.0, tight()))
                     .value;
        if (!lo.converged) return std::numeric_limits<double>::infinity();
        return lo.value + hi;
    }
    return std::numeric_limits<double>::infinity();
}

bool LevyMeasure::bounded_variation() const {
    if (const auto* m = std::get_if<IsotropicStable>(&family_)) return m->alpha < 1.0;
    if (const auto* m = std::get_if<OneDimStable>(&family_)) return m->alpha < 1.0;
    return true;
}

double LevyMeasure::stable_index() const {
    if (const auto* m = std::get_if<IsotropicStable>(&family_)) return m->alpha;
    if (const auto* m = std::get_if<OneDimStable>(&family_)) return m->alpha;
    if (is_finite()) return 0.0;
    return std::numeric_limits<double>::quiet_NaN();
}

double LevyMeasure::radial_stable_coefficient() const {
    if (const auto* m = std::get_if<IsotropicStable>(&family_))
        return special::stable_constant(m->d, m->alpha) * special::sphere_area(m->d);
    if (const auto* m = std::get_if<OneDimStable>(&family_)) {
        const stable::SkewedStableParams p(m->alpha, m->beta);
        return p.c_plus() + p.c_minus();
    }
    throw UnsupportedError("radial_stable_coefficient: not a stable family");
}

double LevyMeasure::tail_mass(double r) const {
    if (!(r > 0.0)) throw DomainError("tail_mass: r must be positive");
    return std::visit(
        overloaded{[&](const FiniteAtomic& m) {
                       double s = 0.0;
                       for (const auto& a : m.atoms)
                           if (norm(a.location) >= r) s += a.mass;
                       return s;
                   },
                   [&](const RadialDensity& m) {
                       if (r >= m.support_radius) return 0.0;
                       const double w = special::sphere_area(m.d);
                       auto f = [&](double s) { return w * m.profile(s) * std::pow(s, m.d - 1); };
                       auto res = std::isfinite(m.support_radius) ? quad::integrate(f, r, m.support_radius, tight())
                                                                  : quad::integrate_to_infinity(f, r, tight());
                       if (!res.converged)
                           throw NumericError("tail_mass: radial density quadrature did not converge", res.value,
                                              res.error);
                       return res.value;
                   },
                   [&](const auto& m) {
                       return radial_stable_coefficient() * std::pow(r, -m.alpha) / m.alpha;
                   }},
        family_);
}

double LevyMeasure::concentration_h(double r) const {
    if (!(r > 0.0)) throw DomainError("concentration_h: r must be positive");
    return std::visit(
        overloaded{[&](const FiniteAtomic& m) {
                       double s = 0.0;
                       for (const auto& a : m.atoms) {
                           const double z = norm(a.location);
                           s += a.mass * std::min(1.0, z * z / (r * r));
                       }
                       return s;
                   },
                   [&](const RadialDensity& m) {
                       const double w = special::sphere_area(m.d);
                       auto f = [&](double s) { return w * s * s * m.profile(s) * std::pow(s, m.d - 1); };
                       auto inner = quad::integrate_from_zero(f, std::min(r, m.support_radius), tight());
                       if (!inner.converged)
                           throw NumericError("concentration_h: quadrature did not converge", inner.value, inner.error);
                       return tail_mass(r) + inner.value / (r * r);
                   },
                   [&](const auto& m) {
                       const double a = m.alpha;
                       return radial_stable_coefficient() * std::pow(r, -a) * (1.0 / a + 1.0 / (2.0 - a));
                   }},
        family_);
}

LevyMeasure::MomentReport LevyMeasure::truncated_moment(double p, double r) const {
    if (!(r > 0.0)) throw DomainError("truncated_moment: r must be positive");
    if (!(p > 0.0)) throw DomainError("truncated_moment: p must be positive");
    double direct = 0.0;
    double tol = 1e-8;
    std::vector<double> breaks;
    std::visit(overloaded{[&](const FiniteAtomic& m) {
                              for (const auto& a : m.atoms) {
                                  const double z = norm(a.location);
                                  if (z < r) {
                                      direct += a.mass * std::pow(z, p);
                                      breaks.push_back(z);
                                  }
                              }
                              tol = 1e-10;
                          },
                          [&](const RadialDensity& m) {
                              const double w = special::sphere_area(m.d);
                              auto f = [&](double s) { return w * std::pow(s, p + m.d - 1) * m.profile(s); };
                              auto res = quad::integrate_from_zero(f, std::min(r, m.support_radius), tight());
                              if (!res.converged)
                                  throw NumericError("truncated_moment: quadrature did not converge", res.value,
                                                     res.error);
                              direct = res.value;
                              tol = 1e-6;
                          },
                          [&](const auto& m) {
                              if (p <= m.alpha)
                                  throw DomainError("truncated_moment: p <= alpha, the moment diverges");
                              direct = radial_stable_coefficient() * std::pow(r, p - m.alpha) / (p - m.alpha);
                          }},
               family_);

    auto integrand = [&](double s) { return p * std::pow(s, p - 1.0) * tail_mass(s); };
    double lc_int = 0.0;
    if (is_finite()) {
        breaks.push_back(r);
        std::sort(breaks.begin(), breaks.end());
        double lo = 0.0;
        for (double b : breaks) {
            if (b > lo) lc_int += quad::integrate(integrand, lo, b, tight()).value;
            lo = b;
        }
    } else {
        auto res = quad::integrate_from_zero(integrand, r, tight());
        if (!res.converged)
            throw NumericError("truncated_moment: layer-cake quadrature did not converge", res.value, res.error);
        lc_int = res.value;
    }
    const double layer = lc_int - std::pow(r, p) * tail_mass(r);
    const double scale = std::max(std::abs(direct), std::abs(layer));
    const double rel = scale > 0.0 ? std::abs(direct - layer) / scale : 0.0;
    if (rel > tol && std::abs(direct - layer) > 1e-300)
        throw NumericError("truncated_moment: direct and layer-cake evaluations disagree", direct, rel);
    return {direct, layer, rel};
}

double LevyMeasure::polar_density(double s) const {
    return std::visit(overloaded{[&](const IsotropicStable& m) {
                                     return special::stable_constant(m.d, m.alpha) * std::pow(s, -1.0 - m.alpha);
                                 },
                                 [&](const OneDimStable& m) {
                                     return 0.5 * radial_stable_coefficient() * std::pow(s, -1.0 - m.alpha);
                                 },
                                 [&](const RadialDensity& m) {
                                     return s >= m.support_radius ? 0.0 : m.profile(s) * std::pow(s, m.d - 1);
                                 },
                                 [&](const FiniteAtomic&) -> double {
                                     throw UnsupportedError("polar_density: finite atomic measure has no density");
                                 }},
                      family_);
}

double LevyMeasure::re_symbol_radial(double k) const {
    k = std::abs(k);
    if (k == 0.0) return 0.0;
    return std::visit(
        overloaded{[&](const IsotropicStable& m) { return std::pow(k, m.alpha); },
                   [&](const OneDimStable& m) {
                       return stable::SkewedStableParams(m.alpha, m.beta).gamma() * std::pow(k, m.alpha);
                   },
                   [&](const FiniteAtomic& m) {
                       if (dim_ != 1)
                           throw UnsupportedError("re_symbol_radial: atomic measure in d > 1 is not radial");
                       double s = 0.0;
                       for (const auto& a : m.atoms) s += a.mass * (1.0 - std::cos(k * a.location[0]));
                       return s;
                   },
                   [&](const RadialDensity& m) {
                       const double w = special::sphere_area(m.d);
                       auto f = [&](double s) {
                           return w * m.profile(s) * std::pow(s, m.d - 1) * (1.0 - spherical_cos_mean(m.d, k * s));
                       };
                       // oscillation handled by breakpoints every period out to the support
                       const double period = 2.0 * pi / k;
                       const double reach = std::isfinite(m.support_radius) ? m.support_radius : 200.0 * period;
                       double total = quad::integrate_from_zero(f, std::min(period, reach), tight()).value;
                       double lo = std::min(period, reach);
                       while (lo < reach) {
                           const double hi = std::min(reach, lo + 16.0 * period);
                           total += quad::integrate(f, lo, hi, tight()).value;
                           lo = hi;
                       }
                       if (!std::isfinite(m.support_radius)) total += tail_mass(reach);  // cos mean averages out
                       return total;
                   }},
        family_);
}

std::string symbol_name(const SymbolSpec& sym) {
    std::ostringstream os;
    std::visit(overloaded{[&](const FromMeasure& s) { os << "from_measure(" << s.measure.name() << ")"; },
                          [&](const StablePower& s) { os << "stable_power(alpha=" << s.alpha << ")"; },
                          [&](const LogSymbol&) { os << "log_symbol"; },
                          [&](const SkewedStable& s) { os << "skewed_stable(alpha=" << s.alpha << ",beta=" << s.beta << ")"; }},
               sym);
    return os.str();
}

namespace {

// Grid sup with golden-section refinement of each local grid maximum.
double grid_sup(const std::function<double(double)>& f, double r, double h) {
    const int max_points = 200000;
    if (r / h > max_points) h = r / max_points;
    std::vector<double> xs;
    for (double x = 0.0; x < r; x += h) xs.push_back(x);
    xs.push_back(r);
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);
    double best = *std::max_element(fs.begin(), fs.end());
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        if (!(fs[i] >= fs[i - 1] && fs[i] >= fs[i + 1])) continue;
        double a = xs[i - 1], b = xs[i + 1];
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = f(d);
            }
        }
        best = std::max({best, fc, fd});
    }
    return best;
}

}  // namespace

double psi_star(const SymbolSpec& sym, double r) {
    if (!(r > 0.0)) throw DomainError("psi_star: r must be positive");
    return std::visit(
        overloaded{[&](const StablePower& s) { return std::pow(r, s.alpha); },
                   [&](const LogSymbol&) { return std::log1p(r * r); },
                   [&](const SkewedStable& s) {
                       return stable::SkewedStableParams(s.alpha, s.beta).gamma() * std::pow(r, s.alpha);
                   },
                   [&](const FromMeasure& s) {
                       const auto& nu = s.measure;
                       if (std::holds_alternative<IsotropicStable>(nu.family()) ||
                           std::holds_alternative<OneDimStable>(nu.family()))
                           return nu.re_symbol_radial(r);  // monotone closed form
                       double h = 0.0;
                       if (const auto* m = std::get_if<FiniteAtomic>(&nu.family())) {
                           if (nu.dimension() != 1)
                               throw UnsupportedError("psi_star: non-radial measure in d > 1");
                           double zmax = 0.0;
                           for (const auto& a : m->atoms) zmax = std::max(zmax, norm(a.location));
                           h = 2.0 * pi / zmax / 64.0;
                       } else {
                           const auto& rd = std::get<RadialDensity>(nu.family());
                           const double reach = std::isfinite(rd.support_radius) ? rd.support_radius : 10.0;
                           h = 2.0 * pi / reach / 64.0;
                       }
                       return grid_sup([&](double k) { return nu.re_symbol_radial(k); }, r, h);
                   }},
        sym);
}

WuscReport check_wusc(const SymbolSpec& sym, double alpha, double theta0, const std::vector<double>& lambda_grid,
                      const std::vector<double>& theta_grid) {
    if (lambda_grid.empty() || theta_grid.empty()) throw DomainError("check_wusc: empty grid");
    for (double l : lambda_grid)
        if (!(l >= 1.0)) throw DomainError("check_wusc: lambda grid entries must be >= 1");
    for (double t : theta_grid)
        if (!(t > theta0)) throw DomainError("check_wusc: theta grid entries must exceed theta0");
    std::vector<double> lambdas = lambda_grid;
    std::sort(lambdas.begin(), lambdas.end());
    WuscReport rep;
    rep.c_emp = -1.0;
    std::vector<double> per_lambda;
    std::vector<double> psi_theta(theta_grid.size());
    for (std::size_t j = 0; j < theta_grid.size(); ++j) psi_theta[j] = psi_star(sym, theta_grid[j]);
    for (double l : lambdas) {
        double m = 0.0;
        for (std::size_t j = 0; j < theta_grid.size(); ++j) {
            const double ratio = psi_star(sym, l * theta_grid[j]) / (std::pow(l, alpha) * psi_theta[j]);
            m = std::max(m, ratio);
            if (ratio > rep.c_emp) {
                rep.c_emp = ratio;
                rep.argmax_lambda = l;
                rep.argmax_theta = theta_grid[j];
            }
        }
        per_lambda.push_back(m);
    }
    // trend over the upper half of the lambda range
    const std::size_t start = lambdas.size() / 2;
    const std::size_t n = lambdas.size() - start;
    if (n >= 2 && lambdas.back() > lambdas[start]) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = start; i < lambdas.size(); ++i) {
            const double x = std::log(lambdas[i]);
            const double y = std::log(per_lambda[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double dn = static_cast<double>(n);
        rep.trend_slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    }
    rep.bounded = std::isfinite(rep.c_emp) && rep.trend_slope < 0.02;
    return rep;
}

EquivalenceReport scaling_equivalence_check(const LevyMeasure& nu, const SymbolSpec& sym, double alpha,
                                            const std::vector<double>& r_grid,
                                            const std::vector<double>& lambda_grid) {
    if (r_grid.empty() || lambda_grid.empty()) throw DomainError("scaling_equivalence_check: empty grid");
    const int d = nu.dimension();
    EquivalenceReport rep;
    rep.lower_bound = 1.0 / (8.0 * (1.0 + 2.0 * d));
    rep.upper_bound = 2.0;
    rep.c_d = 16.0 * (1.0 + 2.0 * d);
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.max_ratio = 0.0;
    for (double r : r_grid) {
        const double ratio = psi_star(sym, r) / nu.concentration_h(1.0 / r);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.comparability_holds = rep.min_ratio >= rep.lower_bound && rep.max_ratio <= rep.upper_bound;
    rep.c_wusc = check_wusc(sym, alpha, 0.0, lambda_grid, r_grid).c_emp;
    double ch = 0.0;
    for (double l : lambda_grid) {
        const double lam = 1.0 / l;  // lambda <= 1 in (A2)
        for (double r : r_grid)
            ch = std::max(ch, nu.concentration_h(lam * r) / (std::pow(lam, -alpha) * nu.concentration_h(r)));
    }
    rep.c_h = ch;
    rep.a1_implies_a2 = rep.c_h <= rep.c_d * rep.c_wusc;
    rep.a2_implies_a1 = rep.c_wusc <= rep.c_d * rep.c_h;
    return rep;
}

}  // namespace nlheat::levy
