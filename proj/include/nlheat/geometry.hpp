#pragma once

// Bodies and their covariance functions g(y) = |Omega cap (Omega + y)|.

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace nlheat::geometry {

using Point = std::vector<double>;

struct Interval {
    double a;
    double b;
};

struct Box {
    std::vector<Interval> sides;  // one per axis
};

struct Ball {
    Point center;
    double radius;
};

/// Simple polygon; either orientation is accepted.
struct Polygon2D {
    std::vector<std::array<double, 2>> vertices;
};

struct DisjointBoxUnion {
    std::vector<Box> boxes;
};

using Shape = std::variant<Interval, Box, Ball, Polygon2D, DisjointBoxUnion>;

class Body {
public:
    explicit Body(Shape shape);

    static Body interval(double a, double b) { return Body(Interval{a, b}); }
    static Body ball(int d, double radius);
    static Body unit_box(int d);

    const Shape& shape() const { return shape_; }
    int dimension() const { return dim_; }
    double volume() const { return volume_; }
    double diam() const { return diam_; }
    std::string name() const;

    bool contains(const Point& x) const;
    /// Axis-aligned bounding box as (lo, hi) per axis.
    std::vector<Interval> bounding_box() const;

private:
    Shape shape_;
    int dim_ = 1;
    double volume_ = 0.0;
    double diam_ = 0.0;
    std::vector<std::array<double, 2>> ccw_;  // polygon in counter-clockwise order
    std::vector<std::array<std::array<double, 2>, 3>> triangles_;

    friend class CovarianceFn;
};

enum class Strategy { ClosedForm, Geometric, MonteCarloOracle };

/// g_Omega together with its evaluation strategy. Closed forms are used for
/// intervals, boxes, balls and box unions; polygon clipping for polygons.
class CovarianceFn {
public:
    explicit CovarianceFn(Body body);

    const Body& body() const { return body_; }
    Strategy strategy() const { return strategy_; }

    double operator()(const Point& y) const;

    /// g(0) - g(y), evaluated without cancellation for small |y| where a
    /// closed form allows it.
    double deficit(const Point& y) const;

    /// lim_{r->0+} (g(0) - g(r u)) / r for a unit vector u.
    double directional_deriv_at_zero(const Point& u) const;

    /// Per(Omega) from the angular integral of the directional derivatives.
    double perimeter() const;

    /// Lipschitz constant bound Per / 2.
    double lipschitz() const { return 0.5 * perimeter(); }

private:
    double richardson_derivative(const Point& u) const;

    Body body_;
    Strategy strategy_;
    double quadratic_radius_ = 0.0;  // polygons: g is quadratic along rays below this
};

double covariance(const CovarianceFn& cov, const Point& y);
double directional_deriv_at_zero(const CovarianceFn& cov, const Point& u);
double perimeter(const CovarianceFn& cov);

struct McEstimate {
    double value;
    double stderr_;
};

/// Uniform sampling in the bounding box; test oracle for g(y).
McEstimate covariance_mc_oracle(const Body& body, const Point& y, long n_samples, std::uint64_t seed);

/// Sphere quadrature on S^{d-1}, d in {1, 2, 3}: nodes and weights summing
/// to |S^{d-1}|.
struct SphereRule {
    std::vector<Point> nodes;
    std::vector<double> weights;
};
SphereRule sphere_rule(int d);

/// G(r) = int_{S^{d-1}} (g(0) - g(r u)) sigma(du). Closed forms in 1-D and for
/// balls; in the plane, Gauss-Legendre on the arcs between the angles where g
/// changes its quadratic piece; sphere_rule otherwise.
class AngularDeficit {
public:
    explicit AngularDeficit(const CovarianceFn& cov);
    double operator()(double r) const;
    /// Radii where G is not smooth (ascending, includes diam).
    std::vector<double> kinks() const;

private:
    struct Line {
        std::array<double, 2> e;  // unit direction
        double c;                 // signed offset: y = c n + s e, n = (-e1, e0)
    };
    double planar(double r) const;

    const CovarianceFn& cov_;
    int d_;
    bool planar_ = false;
    SphereRule rule_;
    std::vector<Line> lines_;
    std::vector<double> radial_kinks_;
    std::vector<double> gl_x_, gl_w_;
};

/// Gamma((d+1)/2) / pi^{(d-1)/2}.
double perimeter_normalization(int d);

}  // namespace nlheat::geometry
