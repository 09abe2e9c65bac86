#include "nlheat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "nlheat/errors.hpp"
#include "nlheat/special.hpp"

namespace nlheat::geometry {

using special::pi;
using Vec2 = std::array<double, 2>;
using Tri = std::array<Vec2, 3>;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// f(r) = c1 r + c2 r^2 + c3 r^3 on [0, 3h]: c1 = (18 f(h) - 9 f(2h) + 2 f(3h)) / (6h)
template <class F>
double slope_at_zero(F f, double h) {
    return (18.0 * f(h) - 9.0 * f(2.0 * h) + 2.0 * f(3.0 * h)) / (6.0 * h);
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double signed_area(const std::vector<Vec2>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& a = p[i];
        const auto& b = p[(i + 1) % p.size()];
        s += a[0] * b[1] - a[1] * b[0];
    }
    return 0.5 * s;
}

bool on_segment(const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p[0], r[0]) <= q[0] && q[0] <= std::max(p[0], r[0]) && std::min(p[1], r[1]) <= q[1] &&
           q[1] <= std::max(p[1], r[1]);
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& p3, const Vec2& p4) {
    const double d1 = cross(p3, p4, p1), d2 = cross(p3, p4, p2);
    const double d3 = cross(p1, p2, p3), d4 = cross(p1, p2, p4);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_segment(p3, p1, p4)) return true;
    if (d2 == 0 && on_segment(p3, p2, p4)) return true;
    if (d3 == 0 && on_segment(p1, p3, p2)) return true;
    if (d4 == 0 && on_segment(p1, p4, p2)) return true;
    return false;
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0;
}

// Ear clipping of a counter-clockwise simple polygon.
std::vector<Tri> triangulate(std::vector<Vec2> poly) {
    std::vector<Tri> out;
    int guard = 0;
    while (poly.size() > 3) {
        const std::size_t n = poly.size();
        bool clipped = false;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = poly[(i + n - 1) % n];
            const Vec2& b = poly[i];
            const Vec2& c = poly[(i + 1) % n];
            const double turn = cross(a, b, c);
            if (turn < 0) continue;
            if (turn == 0) {  // collinear vertex: drop it
                poly.erase(poly.begin() + static_cast<long>(i));
                clipped = true;
                break;
            }
            bool ear = true;
            for (std::size_t j = 0; j < n && ear; ++j) {
                if (j == i || j == (i + 1) % n || j == (i + n - 1) % n) continue;
                const Vec2& p = poly[j];
                if (p == a || p == b || p == c) continue;
                if (point_in_triangle(p, a, b, c)) ear = false;
            }
            if (!ear) continue;
            out.push_back({a, b, c});
            poly.erase(poly.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped || ++guard > 100000) throw NumericError("triangulate: no ear found (degenerate polygon)");
    }
    if (poly.size() == 3 && cross(poly[0], poly[1], poly[2]) > 0) out.push_back({poly[0], poly[1], poly[2]});
    return out;
}

// Sutherland-Hodgman clip of a convex polygon by a counter-clockwise triangle.
double convex_overlap(const Tri& subject, const Tri& clip) {
    std::vector<Vec2> cur(subject.begin(), subject.end());
    std::vector<Vec2> next;
    for (int e = 0; e < 3 && !cur.empty(); ++e) {
        const Vec2& a = clip[e];
        const Vec2& b = clip[(e + 1) % 3];
        next.clear();
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const Vec2& p = cur[i];
            const Vec2& q = cur[(i + 1) % cur.size()];
            const double sp = cross(a, b, p), sq = cross(a, b, q);
            if (sp >= 0) next.push_back(p);
            if ((sp >= 0) != (sq >= 0)) {
                const double t = sp / (sp - sq);
                next.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
            }
        }
        cur.swap(next);
    }
    return cur.size() < 3 ? 0.0 : std::max(0.0, signed_area(cur));
}

double interval_overlap(const Interval& p, const Interval& q, double shift) {
    // |p cap (q + shift)| as a min of endpoint differences, so touching faces stay exact
    const double m = std::min({p.b - p.a, q.b - q.a, (p.b - q.a) - shift, (q.b - p.a) + shift});
    return std::max(0.0, m);
}

double box_pair_overlap(const Box& p, const Box& q, const Point& y) {
    double v = 1.0;
    for (std::size_t k = 0; k < p.sides.size() && v > 0.0; ++k) v *= interval_overlap(p.sides[k], q.sides[k], y[k]);
    return v;
}

double box_volume(const Box& b) {
    double v = 1.0;
    for (const auto& s : b.sides) v *= s.b - s.a;
    return v;
}

double norm(const Point& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void check_box(const Box& b) {
    if (b.sides.empty()) throw DomainError("box: no sides");
    for (const auto& s : b.sides)
        if (!(s.b > s.a) || !std::isfinite(s.a) || !std::isfinite(s.b))
            throw DomainError("box: every side must satisfy a < b");
}

}  // namespace

Body::Body(Shape shape) : shape_(std::move(shape)) {
    std::visit(
        overloaded{
            [&](const Interval& s) {
                if (!(s.b > s.a) || !std::isfinite(s.a) || !std::isfinite(s.b))
                    throw DomainError("interval: require a < b");
                dim_ = 1;
                volume_ = s.b - s.a;
                diam_ = volume_;
            },
            [&](const Box& s) {
                check_box(s);
                dim_ = static_cast<int>(s.sides.size());
                volume_ = box_volume(s);
                double d2 = 0.0;
                for (const auto& side : s.sides) d2 += (side.b - side.a) * (side.b - side.a);
                diam_ = std::sqrt(d2);
            },
            [&](const Ball& s) {
                if (s.center.empty()) throw DomainError("ball: empty center");
                if (!(s.radius > 0.0) || !std::isfinite(s.radius)) throw DomainError("ball: radius must be positive");
                dim_ = static_cast<int>(s.center.size());
                volume_ = special::ball_volume(dim_) * std::pow(s.radius, dim_);
                diam_ = 2.0 * s.radius;
            },
            [&](const Polygon2D& s) {
                auto v = s.vertices;
                if (v.size() >= 2 && v.front() == v.back()) v.pop_back();
                if (v.size() < 3) throw DomainError("polygon: need at least 3 vertices");
                const std::size_t n = v.size();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j) {
                        if (v[i] == v[j]) throw DomainError("polygon: repeated vertex");
                        const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                        if (adjacent) continue;
                        if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                            throw DomainError("polygon: edges intersect (not simple)");
                    }
                const double area = signed_area(v);
                if (area == 0.0) throw DomainError("polygon: zero area");
                if (area < 0) std::reverse(v.begin(), v.end());
                dim_ = 2;
                volume_ = std::abs(area);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j)
                        diam_ = std::max(diam_, std::hypot(v[i][0] - v[j][0], v[i][1] - v[j][1]));
                ccw_ = v;
                triangles_ = triangulate(v);
            },
            [&](const DisjointBoxUnion& s) {
                if (s.boxes.empty()) throw DomainError("box union: no boxes");
                for (const auto& b : s.boxes) check_box(b);
                dim_ = static_cast<int>(s.boxes.front().sides.size());
                const Point zero(dim_, 0.0);
                for (std::size_t i = 0; i < s.boxes.size(); ++i) {
                    if (static_cast<int>(s.boxes[i].sides.size()) != dim_)
                        throw DomainError("box union: inconsistent dimensions");
                    volume_ += box_volume(s.boxes[i]);
                    for (std::size_t j = i + 1; j < s.boxes.size(); ++j)
                        if (box_pair_overlap(s.boxes[i], s.boxes[j], zero) > 0.0)
                            throw DomainError("box union: boxes overlap");
                }
                // farthest pair of corners
                std::vector<Point> corners;
                for (const auto& b : s.boxes)
                    for (int m = 0; m < (1 << dim_); ++m) {
                        Point c(dim_);
                        for (int k = 0; k < dim_; ++k) c[k] = (m >> k & 1) ? b.sides[k].b : b.sides[k].a;
                        corners.push_back(c);
                    }
                for (std::size_t i = 0; i < corners.size(); ++i)
                    for (std::size_t j = i + 1; j < corners.size(); ++j) {
                        Point dlt(dim_);
                        for (int k = 0; k < dim_; ++k) dlt[k] = corners[i][k] - corners[j][k];
                        diam_ = std::max(diam_, norm(dlt));
                    }
            }},
        shape_);
}

Body Body::ball(int d, double radius) {
    if (d < 1) throw DomainError("ball: dimension must be >= 1");
    return Body(Ball{Point(d, 0.0), radius});
}

Body Body::unit_box(int d) {
    if (d < 1) throw DomainError("box: dimension must be >= 1");
    return Body(Box{std::vector<Interval>(d, Interval{0.0, 1.0})});
}

std::string Body::name() const {
    std::ostringstream os;
    std::visit(overloaded{[&](const Interval& s) { os << "interval(" << s.a << "," << s.b << ")"; },
                          [&](const Box& s) {
                              os << "box(";
                              for (std::size_t k = 0; k < s.sides.size(); ++k)
                                  os << (k ? "x" : "") << "[" << s.sides[k].a << "," << s.sides[k].b << "]";
                              os << ")";
                          },
                          [&](const Ball& s) { os << "ball(d=" << s.center.size() << ",r=" << s.radius << ")"; },
                          [&](const Polygon2D& s) { os << "polygon(" << s.vertices.size() << " vertices)"; },
                          [&](const DisjointBoxUnion& s) { os << "box_union(" << s.boxes.size() << " boxes)"; }},
               shape_);
    return os.str();
}

bool Body::contains(const Point& x) const {
    if (static_cast<int>(x.size()) != dim_) throw DomainError("contains: dimension mismatch");
    auto in_box = [&](const Box& b) {
        for (int k = 0; k < dim_; ++k)
            if (x[k] < b.sides[k].a || x[k] >= b.sides[k].b) return false;
        return true;
    };
    return std::visit(overloaded{[&](const Interval& s) { return x[0] >= s.a && x[0] < s.b; },
                                 [&](const Box& s) { return in_box(s); },
                                 [&](const Ball& s) {
                                     double r2 = 0.0;
                                     for (int k = 0; k < dim_; ++k) r2 += (x[k] - s.center[k]) * (x[k] - s.center[k]);
                                     return r2 < s.radius * s.radius;
                                 },
                                 [&](const Polygon2D&) {
                                     bool in = false;
                                     const std::size_t n = ccw_.size();
                                     for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                                         const auto& a = ccw_[i];
                                         const auto& b = ccw_[j];
                                         if ((a[1] > x[1]) != (b[1] > x[1]) &&
                                             x[0] < (b[0] - a[0]) * (x[1] - a[1]) / (b[1] - a[1]) + a[0])
                                             in = !in;
                                     }
                                     return in;
                                 },
                                 [&](const DisjointBoxUnion& s) {
                                     return std::any_of(s.boxes.begin(), s.boxes.end(), in_box);
                                 }},
                      shape_);
}

std::vector<Interval> Body::bounding_box() const {
    return std::visit(overloaded{[&](const Interval& s) { return std::vector<Interval>{s}; },
                                 [&](const Box& s) { return s.sides; },
                                 [&](const Ball& s) {
                                     std::vector<Interval> out;
                                     for (double c : s.center) out.push_back({c - s.radius, c + s.radius});
                                     return out;
                                 },
                                 [&](const Polygon2D&) {
                                     Interval xs{ccw_[0][0], ccw_[0][0]}, ys{ccw_[0][1], ccw_[0][1]};
                                     for (const auto& v : ccw_) {
                                         xs.a = std::min(xs.a, v[0]);
                                         xs.b = std::max(xs.b, v[0]);
                                         ys.a = std::min(ys.a, v[1]);
                                         ys.b = std::max(ys.b, v[1]);
                                     }
                                     return std::vector<Interval>{xs, ys};
                                 },
                                 [&](const DisjointBoxUnion& s) {
                                     auto out = s.boxes.front().sides;
                                     for (const auto& b : s.boxes)
                                         for (int k = 0; k < dim_; ++k) {
                                             out[k].a = std::min(out[k].a, b.sides[k].a);
                                             out[k].b = std::max(out[k].b, b.sides[k].b);
                                         }
                                     return out;
                                 }},
                      shape_);
}

CovarianceFn::CovarianceFn(Body body)
    : body_(std::move(body)),
      strategy_(std::holds_alternative<Polygon2D>(body_.shape()) ? Strategy::Geometric : Strategy::ClosedForm) {
    // g is piecewise quadratic, with pieces cut by the lines {y : v + y on an edge
    // line}; below the nearest such line that misses the origin every ray stays
    // in one piece.
    if (strategy_ != Strategy::Geometric) return;
    const auto& v = body_.ccw_;
    double rmin = body_.diam();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        for (const auto& w : v) {
            const double dist = std::abs(cross(w, a, b)) / len;
            if (dist > 1e-12 * body_.diam()) rmin = std::min(rmin, dist);
        }
    }
    quadratic_radius_ = rmin;
}

double CovarianceFn::operator()(const Point& y) const {
    const int d = body_.dimension();
    if (static_cast<int>(y.size()) != d) throw DomainError("covariance: dimension mismatch");
    if (norm(y) >= body_.diam()) return 0.0;
    return std::visit(overloaded{[&](const Interval& s) { return std::max(0.0, s.b - s.a - std::abs(y[0])); },
                                 [&](const Box& s) { return box_pair_overlap(s, s, y); },
                                 [&](const Ball& s) { return special::ball_lens_volume(d, s.radius, norm(y)); },
                                 [&](const Polygon2D&) {
                                     double area = 0.0;
                                     for (const auto& t : body_.triangles_) {
                                         Tri shifted = t;
                                         for (auto& v : shifted) v = {v[0] + y[0], v[1] + y[1]};
                                         for (const auto& c : body_.triangles_) area += convex_overlap(shifted, c);
                                     }
                                     return std::min(area, body_.volume());
                                 },
                                 [&](const DisjointBoxUnion& s) {
                                     double v = 0.0;
                                     for (const auto& p : s.boxes)
                                         for (const auto& q : s.boxes) v += box_pair_overlap(p, q, y);
                                     return v;
                                 }},
                      body_.shape());
}

double CovarianceFn::deficit(const Point& y) const {
    const int d = body_.dimension();
    if (static_cast<int>(y.size()) != d) throw DomainError("covariance: dimension mismatch");
    const double g0 = body_.volume();
    if (norm(y) >= body_.diam()) return g0;
    if (const auto* s = std::get_if<Interval>(&body_.shape())) return std::min(std::abs(y[0]), s->b - s->a);
    // |B| - |B cap (B + y)| for a single box
    auto box_deficit = [&](const Box& b) {
        double vol = 1.0, lsum = 0.0;
        for (int k = 0; k < d; ++k) {
            const double len = b.sides[k].b - b.sides[k].a;
            vol *= len;
            const double rel = std::abs(y[k]) / len;
            if (rel >= 1.0) return -1.0;
            lsum += std::log1p(-rel);
        }
        return -vol * std::expm1(lsum);
    };
    if (const auto* s = std::get_if<Box>(&body_.shape())) {
        const double v = box_deficit(*s);
        return v < 0.0 ? g0 : v;
    }
    if (const auto* s = std::get_if<DisjointBoxUnion>(&body_.shape())) {
        // self terms without cancellation; cross terms vanish for |y| below the gaps
        double v = 0.0;
        for (std::size_t i = 0; i < s->boxes.size(); ++i) {
            const double b = box_deficit(s->boxes[i]);
            v += b < 0.0 ? box_volume(s->boxes[i]) : b;
            for (std::size_t j = 0; j < s->boxes.size(); ++j)
                if (j != i) v -= box_pair_overlap(s->boxes[i], s->boxes[j], y);
        }
        return v;
    }
    if (const auto* s = std::get_if<Ball>(&body_.shape())) {
        const double r = norm(y);
        if (r == 0.0) return 0.0;
        const double u = r * r / (4.0 * s->radius * s->radius);
        return g0 * special::ibeta(0.5, 0.5 * (d + 1), u);
    }
    if (std::holds_alternative<Polygon2D>(body_.shape())) {
        const double r = norm(y);
        if (r == 0.0) return 0.0;
        if (r < quadratic_radius_) {
            // g(0) - g(r u) = r D(u) - r^2 Q(u); Q read off at a radius free of cancellation
            const Point u{y[0] / r, y[1] / r};
            const double D = directional_deriv_at_zero(u);
            const double r1 = 0.5 * quadratic_radius_;
            const double Q = (r1 * D - (g0 - (*this)(Point{r1 * u[0], r1 * u[1]}))) / (r1 * r1);
            return r * D - r * r * Q;
        }
    }
    return g0 - (*this)(y);
}

double CovarianceFn::richardson_derivative(const Point& u) const {
    const double g0 = body_.volume();
    auto quotient = [&](double r) {
        Point y(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) y[k] = r * u[k];
        return (g0 - (*this)(y)) / r;
    };
    double prev_q = quotient(std::ldexp(body_.diam(), -8));
    double prev_ext = std::numeric_limits<double>::quiet_NaN();
    for (int k = 9; k <= 20; ++k) {
        const double q = quotient(std::ldexp(body_.diam(), -k));
        const double ext = 2.0 * q - prev_q;
        if (std::isfinite(prev_ext) && std::abs(ext - prev_ext) <= 1e-6 * std::max(std::abs(ext), 1e-300))
            return ext;
        prev_ext = ext;
        prev_q = q;
    }
    throw NumericError("directional derivative: Richardson extrapolation did not settle", prev_ext);
}

double CovarianceFn::directional_deriv_at_zero(const Point& u) const {
    const int d = body_.dimension();
    if (static_cast<int>(u.size()) != d) throw DomainError("directional derivative: dimension mismatch");
    if (std::abs(norm(u) - 1.0) > 1e-12) throw DomainError("directional derivative: u must be a unit vector");
    return std::visit(overloaded{[&](const Interval&) { return 1.0; },
                                 [&](const Box& s) {
                                     double total = 0.0;
                                     for (int i = 0; i < d; ++i) {
                                         double face = std::abs(u[i]);
                                         for (int j = 0; j < d; ++j)
                                             if (j != i) face *= s.sides[j].b - s.sides[j].a;
                                         total += face;
                                     }
                                     return total;
                                 },
                                 [&](const Ball& s) {
                                     return d == 1 ? 1.0 : special::ball_volume(d - 1) * std::pow(s.radius, d - 1);
                                 },
                                 [&](const Polygon2D&) {
                                     // half the total edge length projected orthogonally to u
                                     const auto& v = body_.ccw_;
                                     double total = 0.0;
                                     for (std::size_t i = 0; i < v.size(); ++i) {
                                         const auto& a = v[i];
                                         const auto& b = v[(i + 1) % v.size()];
                                         total += std::abs((b[0] - a[0]) * u[1] - (b[1] - a[1]) * u[0]);
                                     }
                                     return 0.5 * total;
                                 },
                                 [&](const DisjointBoxUnion& s) {
                                     if (d > 3) return richardson_derivative(u);
                                     // the deficit is a polynomial of degree d in r below the
                                     // smallest nonzero endpoint difference
                                     double rs = body_.diam();
                                     for (const auto& p : s.boxes)
                                         for (const auto& q : s.boxes)
                                             for (int k = 0; k < d; ++k)
                                                 for (double v : {p.sides[k].a - q.sides[k].a, p.sides[k].a - q.sides[k].b,
                                                                  p.sides[k].b - q.sides[k].a, p.sides[k].b - q.sides[k].b})
                                                     if (std::abs(v) > 1e-12 * body_.diam()) rs = std::min(rs, std::abs(v));
                                     auto f = [&](double r) {
                                         Point y(d);
                                         for (int k = 0; k < d; ++k) y[k] = r * u[k];
                                         return deficit(y);
                                     };
                                     return slope_at_zero(f, 0.25 * rs);
                                 }},
                      body_.shape());
}

double CovarianceFn::perimeter() const {
    const int d = body_.dimension();
    if (d == 2 && !std::holds_alternative<Ball>(body_.shape())) {
        // below the first radial kink G(r) is a quadratic in r with no constant term
        const AngularDeficit G(*this);
        const double h = 0.25 * G.kinks().front();
        return perimeter_normalization(2) * slope_at_zero(G, h);
    }
    const auto rule = sphere_rule(d);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        total += rule.weights[i] * directional_deriv_at_zero(rule.nodes[i]);
    return perimeter_normalization(d) * total;
}

double covariance(const CovarianceFn& cov, const Point& y) { return cov(y); }
double directional_deriv_at_zero(const CovarianceFn& cov, const Point& u) { return cov.directional_deriv_at_zero(u); }
double perimeter(const CovarianceFn& cov) { return cov.perimeter(); }

McEstimate covariance_mc_oracle(const Body& body, const Point& y, long n_samples, std::uint64_t seed) {
    if (n_samples < 1000) throw DomainError("covariance_mc_oracle: need at least 1000 samples");
    const int d = body.dimension();
    if (static_cast<int>(y.size()) != d) throw DomainError("covariance_mc_oracle: dimension mismatch");
    const auto bb = body.bounding_box();
    double vol = 1.0;
    for (const auto& s : bb) vol *= s.b - s.a;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Point x(d), xs(d);
    long hits = 0;
    for (long i = 0; i < n_samples; ++i) {
        for (int k = 0; k < d; ++k) {
            x[k] = bb[k].a + (bb[k].b - bb[k].a) * unif(rng);
            xs[k] = x[k] - y[k];
        }
        if (body.contains(x) && body.contains(xs)) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
    return {vol * p, vol * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples))};
}

SphereRule sphere_rule(int d) {
    SphereRule rule;
    if (d == 1) {
        rule.nodes = {{1.0}, {-1.0}};
        rule.weights = {1.0, 1.0};
    } else if (d == 2) {
        const int n = 2048;
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * pi * i / n;
            rule.nodes.push_back({std::cos(a), std::sin(a)});
            rule.weights.push_back(2.0 * pi / n);
        }
    } else if (d == 3) {
        // Gauss-Legendre of order 32 on each z half and each azimuthal quadrant,
        // so the kinks of |u_i| fall on panel boundaries.
        std::vector<double> x, w;
        special::gauss_legendre(32, x, w);
        for (int zh = 0; zh < 2; ++zh)
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double z = 0.5 * (x[i] + 1.0) - zh;  // [0,1] or [-1,0]
                const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
                for (int q = 0; q < 4; ++q)
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        const double phi = 0.25 * pi * (x[j] + 1.0) + 0.5 * pi * q;
                        rule.nodes.push_back({s * std::cos(phi), s * std::sin(phi), z});
                        rule.weights.push_back(0.5 * w[i] * 0.25 * pi * w[j]);
                    }
            }
    } else {
        throw UnsupportedError("sphere_rule: only d <= 3 is supported");
    }
    return rule;
}

double perimeter_normalization(int d) {
    return special::gamma(0.5 * (d + 1)) / std::pow(pi, 0.5 * (d - 1));
}

}  // namespace nlheat::geometry

namespace nlheat::geometry {

namespace {

// Boundary vertices and edges of a planar polygon or box union.
void planar_boundary(const Shape& shape, std::vector<Vec2>& verts, std::vector<std::array<Vec2, 2>>& edges) {
    auto add_ring = [&](const std::vector<Vec2>& ring) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
            verts.push_back(ring[i]);
            edges.push_back({ring[i], ring[(i + 1) % ring.size()]});
        }
    };
    auto add_box = [&](const Box& b) {
        const auto& x = b.sides[0];
        const auto& y = b.sides[1];
        add_ring({{x.a, y.a}, {x.b, y.a}, {x.b, y.b}, {x.a, y.b}});
    };
    if (const auto* p = std::get_if<Polygon2D>(&shape)) add_ring(p->vertices);
    if (const auto* b = std::get_if<Box>(&shape)) add_box(*b);
    if (const auto* u = std::get_if<DisjointBoxUnion>(&shape))
        for (const auto& b : u->boxes) add_box(b);
}

}  // namespace

// In the plane g is piecewise quadratic; the pieces are cut by the lines
// {y : v + y on the line of edge e} over vertices v and edges e. On a circle
// |y| = r the integrand is a degree-2 trigonometric polynomial between
// consecutive crossing angles, so Gauss-Legendre on each arc is exact up to
// rounding.
AngularDeficit::AngularDeficit(const CovarianceFn& cov) : cov_(cov), d_(cov.body().dimension()) {
    const auto& shape = cov.body().shape();
    if (d_ == 1 || std::holds_alternative<Ball>(shape)) return;
    if (d_ != 2) {
        rule_ = sphere_rule(d_);
        return;
    }
    planar_ = true;
    special::gauss_legendre(16, gl_x_, gl_w_);
    std::vector<Vec2> verts;
    std::vector<std::array<Vec2, 2>> edges;
    planar_boundary(shape, verts, edges);
    const double scale = cov.body().diam();
    for (const auto& ed : edges) {
        Vec2 e{ed[1][0] - ed[0][0], ed[1][1] - ed[0][1]};
        const double len = std::hypot(e[0], e[1]);
        if (len == 0.0) continue;
        e = {e[0] / len, e[1] / len};
        if (e[0] < 0.0 || (e[0] == 0.0 && e[1] < 0.0)) e = {-e[0], -e[1]};
        for (const auto& v : verts) {
            const Vec2 p{ed[0][0] - v[0], ed[0][1] - v[1]};
            const double c = e[0] * p[1] - e[1] * p[0];
            for (double cc : {c, -c}) {  // the line and its reflection through 0
                bool dup = false;
                for (const auto& l : lines_)
                    if (std::abs(l.e[0] - e[0]) < 1e-12 && std::abs(l.e[1] - e[1]) < 1e-12 &&
                        std::abs(l.c - cc) < 1e-12 * scale)
                        dup = true;
                if (!dup) lines_.push_back({e, cc});
            }
        }
    }
    for (const auto& l : lines_) radial_kinks_.push_back(std::abs(l.c));
    if (lines_.size() > 64) return;  // too many vertices of the arrangement to track
    for (std::size_t i = 0; i < lines_.size(); ++i)
        for (std::size_t j = i + 1; j < lines_.size(); ++j) {
            const auto& a = lines_[i];
            const auto& b = lines_[j];
            const double det = a.e[0] * b.e[1] - a.e[1] * b.e[0];
            if (std::abs(det) < 1e-12) continue;
            const Vec2 pa{-a.c * a.e[1], a.c * a.e[0]};
            const Vec2 pb{-b.c * b.e[1], b.c * b.e[0]};
            const double s = ((pb[0] - pa[0]) * b.e[1] - (pb[1] - pa[1]) * b.e[0]) / det;
            radial_kinks_.push_back(std::hypot(pa[0] + s * a.e[0], pa[1] + s * a.e[1]));
        }
}

double AngularDeficit::operator()(double r) const {
    const double g0 = cov_.body().volume();
    if (r >= cov_.body().diam()) return special::sphere_area(d_) * g0;
    if (d_ == 1) return cov_.deficit({r}) + cov_.deficit({-r});
    if (std::holds_alternative<Ball>(cov_.body().shape())) {
        Point y(d_, 0.0);
        y[0] = r;
        return special::sphere_area(d_) * cov_.deficit(y);
    }
    if (planar_) return planar(r);
    double s = 0.0;
    Point y(d_);
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
        for (int k = 0; k < d_; ++k) y[k] = r * rule_.nodes[i][k];
        s += rule_.weights[i] * cov_.deficit(y);
    }
    return s;
}

double AngularDeficit::planar(double r) const {
    // g(-y) = g(y): integrate over [0, pi) and double
    std::vector<double> cuts{0.0, pi};
    for (const auto& l : lines_) {
        if (std::abs(l.c) >= r) continue;
        const double s = std::sqrt(r * r - l.c * l.c);
        const Vec2 n{-l.e[1], l.e[0]};
        for (double ss : {s, -s}) {
            const double a = std::atan2(l.c * n[1] + ss * l.e[1], l.c * n[0] + ss * l.e[0]);
            cuts.push_back(std::fmod(a + 2.0 * pi, pi));
        }
    }
    for (int k = 1; k < 8; ++k) cuts.push_back(k * pi / 8.0);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    Point y(2);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b - a < 1e-15) continue;
        const double m = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t j = 0; j < gl_x_.size(); ++j) {
            const double th = m + h * gl_x_[j];
            y[0] = r * std::cos(th);
            y[1] = r * std::sin(th);
            total += h * gl_w_[j] * cov_.deficit(y);
        }
    }
    return 2.0 * total;
}

std::vector<double> AngularDeficit::kinks() const {
    std::vector<double> out{cov_.body().diam()};
    if (const auto* u = std::get_if<DisjointBoxUnion>(&cov_.body().shape()); u && d_ == 1) {
        for (const auto& p : u->boxes)
            for (const auto& q : u->boxes)
                for (double v : {q.sides[0].a - p.sides[0].a, q.sides[0].a - p.sides[0].b, q.sides[0].b - p.sides[0].a,
                                 q.sides[0].b - p.sides[0].b})
                    if (v > 0.0) out.push_back(v);
    }
    out.insert(out.end(), radial_kinks_.begin(), radial_kinks_.end());
    std::sort(out.begin(), out.end());
    const double eps = 1e-12 * cov_.body().diam();
    std::vector<double> uniq;
    for (double v : out)
        if (v > eps && v <= cov_.body().diam() && (uniq.empty() || v - uniq.back() > eps)) uniq.push_back(v);
    return uniq;
}

}  // namespace nlheat::geometry
