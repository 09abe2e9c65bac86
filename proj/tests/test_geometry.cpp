#include <doctest.h>

#include <cmath>
#include <random>

#include "nlheat/errors.hpp"
#include "nlheat/geometry.hpp"
#include "nlheat/special.hpp"

using namespace nlheat;
using namespace nlheat::geometry;

namespace {

std::vector<Body> bodies() {
    return {Body::interval(0.0, 1.0),
            Body::interval(-0.3, 2.2),
            Body(Box{{{0, 1}, {0, 2}}}),
            Body(Box{{{0, 1}, {0, 1}, {0, 0.5}}}),
            Body::ball(2, 1.0),
            Body::ball(3, 0.7),
            Body(Polygon2D{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}}),  // L-shape
            Body(Polygon2D{{{0, 0}, {1, 0}, {0.3, 0.8}}}),
            Body(DisjointBoxUnion{{Box{{{0, 1}}}, Box{{{2, 2.5}}}}}),
            Body(DisjointBoxUnion{{Box{{{0, 1}, {0, 1}}}, Box{{{2, 3}, {0, 0.5}}}}})};
}

Point random_point(std::mt19937_64& rng, int d, double scale) {
    std::uniform_real_distribution<double> U(-scale, scale);
    Point p(d);
    for (auto& v : p) v = U(rng);
    return p;
}

double norm(const Point& p) {
    double s = 0;
    for (double v : p) s += v * v;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("covariance examples") {
    const CovarianceFn iv(Body::interval(0, 1));
    CHECK(iv({0.5}) == doctest::Approx(0.5));
    CHECK(iv({-0.25}) == doctest::Approx(0.75));
    for (const auto& b : bodies()) {
        const CovarianceFn g(b);
        CHECK(g(Point(b.dimension(), 0.0)) == doctest::Approx(b.volume()).epsilon(1e-13));
    }
    const CovarianceFn disk(Body::ball(2, 1.0));
    CHECK(disk({1.0, 0.0}) == doctest::Approx(2 * M_PI / 3 - std::sqrt(3.0) / 2).epsilon(1e-13));
    const CovarianceFn sq(Body(Box{{{0, 1}, {0, 1}}}));
    CHECK(sq({0.5, 0.5}) == doctest::Approx(0.25));
    const CovarianceFn poly(Body(Polygon2D{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}));
    for (const Point& y : {Point{0.5, 0.5}, Point{-0.2, 0.7}, Point{0.9, -0.05}}) CHECK(poly(y) == doctest::Approx(sq(y)).epsilon(1e-13));
}

TEST_CASE("symmetry, range and support") {
    std::mt19937_64 rng(11);
    for (const auto& b : bodies()) {
        const CovarianceFn g(b);
        for (int i = 0; i < 100; ++i) {
            const Point y = random_point(rng, b.dimension(), 1.2 * b.diam());
            Point my = y;
            for (auto& v : my) v = -v;
            const double v = g(y);
            CHECK(v == doctest::Approx(g(my)).epsilon(1e-12));
            CHECK(v >= 0.0);
            CHECK(v <= b.volume() * (1 + 1e-14));
            if (norm(y) >= b.diam()) CHECK(v == 0.0);
        }
        Point edge(b.dimension(), 0.0);
        edge[0] = b.diam();
        CHECK(g(edge) == 0.0);
    }
}

TEST_CASE("Lipschitz bound Per/2 and the bound g(0) - g(y) <= C (1 ^ |y|)") {
    std::mt19937_64 rng(12);
    for (const auto& b : bodies()) {
        const CovarianceFn g(b);
        const double lip = g.lipschitz();
        const double C = std::max(lip, b.volume());
        for (int i = 0; i < 300; ++i) {
            const Point y = random_point(rng, b.dimension(), b.diam());
            Point y2 = y;
            std::normal_distribution<double> N(0.0, 0.05);
            for (auto& v : y2) v += N(rng);
            Point dy(y.size());
            for (std::size_t k = 0; k < y.size(); ++k) dy[k] = y[k] - y2[k];
            CHECK(std::abs(g(y) - g(y2)) <= lip * norm(dy) + 1e-12);
            CHECK(b.volume() - g(y) <= C * std::min(1.0, norm(y)) + 1e-12);
        }
    }
}

TEST_CASE("directional derivatives at zero") {
    CHECK(CovarianceFn(Body::interval(0, 1)).directional_deriv_at_zero({1.0}) == doctest::Approx(1.0));
    CHECK(CovarianceFn(Body(Box{{{0, 1}, {0, 1}}})).directional_deriv_at_zero({1.0, 0.0}) == doctest::Approx(1.0));
    const CovarianceFn disk(Body::ball(2, 1.0));
    CHECK(disk.directional_deriv_at_zero({0.6, 0.8}) == doctest::Approx(2.0).epsilon(1e-12));
    // closed form vs a one-sided difference quotient of the lens area
    const double r = 1e-6;
    CHECK(disk.deficit({r, 0.0}) / r == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(disk.deficit({0.3, 0.0}) == doctest::Approx(M_PI - disk({0.3, 0.0})).epsilon(1e-12));
    // polygon projection formula vs a difference quotient
    const CovarianceFn L(Body(Polygon2D{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}}));
    const Point u{std::cos(0.4), std::sin(0.4)};
    const double h = 1e-7;
    CHECK(L.directional_deriv_at_zero(u) == doctest::Approx((3.0 - L({h * u[0], h * u[1]})) / h).epsilon(1e-5));
    // box union: sum of the pieces, and an L-shape of two touching boxes vs its polygon
    const CovarianceFn U(Body(DisjointBoxUnion{{Box{{{0, 1}, {0, 1}}}, Box{{{2, 3}, {0, 0.5}}}}}));
    CHECK(U.directional_deriv_at_zero({1.0, 0.0}) == doctest::Approx(1.5).epsilon(1e-12));
    const CovarianceFn LU(Body(DisjointBoxUnion{{Box{{{0, 2}, {0, 1}}}, Box{{{0, 1}, {1, 2}}}}}));
    for (double a : {0.0, 0.4, 1.0, 2.5})
        CHECK(LU.directional_deriv_at_zero({std::cos(a), std::sin(a)}) ==
              doctest::Approx(L.directional_deriv_at_zero({std::cos(a), std::sin(a)})).epsilon(1e-12));
    CHECK_THROWS_AS(disk.directional_deriv_at_zero({1.0, 1.0}), DomainError);
}

TEST_CASE("perimeters") {
    CHECK(CovarianceFn(Body::interval(0, 1)).perimeter() == doctest::Approx(2.0));
    CHECK(CovarianceFn(Body(Box{{{0, 1}, {0, 1}}})).perimeter() == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(std::abs(CovarianceFn(Body::ball(2, 1.0)).perimeter() - 2 * M_PI) < 1e-3);
    CHECK(CovarianceFn(Body::ball(3, 1.0)).perimeter() == doctest::Approx(4 * M_PI).epsilon(1e-6));
    CHECK(CovarianceFn(Body(Box{{{0, 1}, {0, 1}, {0, 1}}})).perimeter() == doctest::Approx(6.0).epsilon(1e-4));
    CHECK(CovarianceFn(Body(Polygon2D{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}})).perimeter() ==
          doctest::Approx(8.0).epsilon(1e-13));
    CHECK(CovarianceFn(Body(DisjointBoxUnion{{Box{{{0, 2}, {0, 1}}}, Box{{{0, 1}, {1, 2}}}}})).perimeter() ==
          doctest::Approx(8.0).epsilon(1e-13));
    const double tri = 1.0 + std::hypot(0.7, 0.8) + std::hypot(0.3, 0.8);
    CHECK(CovarianceFn(Body(Polygon2D{{{0, 0}, {1, 0}, {0.3, 0.8}}})).perimeter() == doctest::Approx(tri).epsilon(1e-13));
    CHECK(CovarianceFn(Body(DisjointBoxUnion{{Box{{{0, 1}}}, Box{{{2, 2.5}}}}})).perimeter() == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(perimeter_normalization(1) == doctest::Approx(1.0));
    CHECK(perimeter_normalization(2) == doctest::Approx(0.5));  // Gamma(3/2) / pi^{1/2}
}

TEST_CASE("Monte Carlo oracle agrees with the closed forms within 4 sigma") {
    CHECK(std::abs(covariance_mc_oracle(Body::interval(0, 1), {0.25}, 1000000, 1).value - 0.75) <
          3 * covariance_mc_oracle(Body::interval(0, 1), {0.25}, 1000000, 1).stderr_ + 1e-12);
    const Body sq(Polygon2D{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    const auto e = covariance_mc_oracle(sq, {0.5, 0.5}, 1000000, 2);
    CHECK(std::abs(e.value - 0.25) < 3 * e.stderr_);
    const auto b3 = covariance_mc_oracle(Body::ball(3, 1.0), {0.7, 0, 0}, 1000000, 3);
    CHECK(std::abs(b3.value - special::ball_lens_volume(3, 1.0, 0.7)) < 3 * b3.stderr_);
    const auto disk = covariance_mc_oracle(Body::ball(2, 1.0), {1.0, 0.0}, 10000000, 4);
    CHECK(std::abs(disk.value - (2 * M_PI / 3 - std::sqrt(3.0) / 2)) < 3 * disk.stderr_);

    std::mt19937_64 rng(5);
    int failures = 0, total = 0;
    for (const auto& b : bodies()) {
        const CovarianceFn g(b);
        for (int i = 0; i < 20; ++i) {
            const Point y = random_point(rng, b.dimension(), 0.8 * b.diam() / std::sqrt(double(b.dimension())));
            const auto mc = covariance_mc_oracle(b, y, 1000000, 100 + i);
            ++total;
            if (std::abs(mc.value - g(y)) > 4 * mc.stderr_ + 1e-12) ++failures;
        }
    }
    CHECK(failures == 0);
    CHECK(total == 200);
    CHECK_THROWS_AS(covariance_mc_oracle(Body::interval(0, 1), {0.1}, 10, 1), DomainError);
}

TEST_CASE("invalid bodies") {
    CHECK_THROWS_AS(Body::interval(1, 1), DomainError);
    CHECK_THROWS_AS(Body::ball(2, -1.0), DomainError);
    CHECK_THROWS_AS(Body(Polygon2D{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}), DomainError);  // bow tie
    CHECK_THROWS_AS(Body(Polygon2D{{{0, 0}, {1, 0}}}), DomainError);
    CHECK_THROWS_AS(Body(DisjointBoxUnion{{Box{{{0, 1}}}, Box{{{0.5, 2}}}}}), DomainError);
}

TEST_CASE("sphere rules integrate to the sphere area") {
    for (int d : {1, 2, 3}) {
        const auto r = sphere_rule(d);
        double s = 0;
        for (double w : r.weights) s += w;
        CHECK(s == doctest::Approx(special::sphere_area(d)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(sphere_rule(4), UnsupportedError);
}
