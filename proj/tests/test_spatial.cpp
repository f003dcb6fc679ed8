#include <catch_amalgamated.hpp>

#include <cmath>

#include "odyn/spatial.hpp"

using namespace odyn;
using Catch::Approx;

namespace {
const Triangle unit_right({0, 0}, {1, 0}, {0, 1});
}

TEST_CASE("fold_into_triangle maps corner draws to vertices", "[spatial]") {
    REQUIRE(fold_into_triangle(unit_right, 0.0, 0.0) == Point2{0, 0});
    REQUIRE(fold_into_triangle(unit_right, 1.0, 0.0) == Point2{1, 0});

    const Triangle shifted({2, 3}, {5, 3}, {2, 7});
    REQUIRE(fold_into_triangle(shifted, 0.0, 0.0) == Point2{2, 3});
    REQUIRE(fold_into_triangle(shifted, 1.0, 0.0) == Point2{5, 3});
}

TEST_CASE("draws above the diagonal are reflected", "[spatial]") {
    const Point2 p = fold_into_triangle(unit_right, 0.6, 0.7);
    REQUIRE(p.x == Approx(0.4).margin(1e-15));
    REQUIRE(p.y == Approx(0.3).margin(1e-15));
}

TEST_CASE("degenerate triangles are rejected at construction", "[spatial]") {
    REQUIRE_THROWS_AS(Triangle({0, 0}, {1, 1}, {2, 2}), ParameterError);
    REQUIRE_THROWS_AS(Triangle({0, 0}, {0, 0}, {1, 0}), ParameterError);
    REQUIRE_THROWS_AS(Triangle({0, 0}, {NAN, 0}, {1, 0}), ParameterError);
}

TEST_CASE("sampled points lie inside their triangle", "[spatial][property]") {
    const Triangle tris[] = {unit_right, equilateral_triangle(3.0), Triangle({-1, 5}, {4, -2}, {7, 9})};
    auto rng = make_stream(11, StreamPurpose::placement);
    for (const auto& t : tris)
        for (int i = 0; i < 20000; ++i) REQUIRE(t.contains(sample_point_in_triangle(t, rng)));
}

TEST_CASE("points are uniform over the unit right triangle", "[spatial][property]") {
    auto rng = make_stream(5, StreamPurpose::placement);
    const int n = 200000;
    double sx = 0.0, sy = 0.0;
    int reflected = 0;
    for (int i = 0; i < n; ++i) {
        const double u = uniform01(rng);
        const double v = uniform01(rng);
        reflected += (u + v > 1.0);
        const Point2 p = fold_into_triangle(unit_right, u, v);
        sx += p.x;
        sy += p.y;
    }
    REQUIRE(sx / n == Approx(1.0 / 3.0).margin(0.01));
    REQUIRE(sy / n == Approx(1.0 / 3.0).margin(0.01));
    REQUIRE(static_cast<double>(reflected) / n == Approx(0.5).margin(0.01));
}

TEST_CASE("sample_population with a fixed count", "[spatial]") {
    Domain d(equilateral_triangle());
    auto rng = make_stream(1, StreamPurpose::placement);
    const auto pts = sample_population(d, std::size_t{1000}, rng);
    REQUIRE(pts.size() == 1000);
    for (auto p : pts) REQUIRE(d.triangles[0].contains(p));
}

TEST_CASE("fixed count needs a single triangle", "[spatial]") {
    Domain d({unit_right, Triangle({10, 0}, {11, 0}, {10, 1})}, {1.0, 1.0});
    auto rng = make_stream(1, StreamPurpose::placement);
    REQUIRE_THROWS_AS(sample_population(d, std::size_t{10}, rng), ConfigError);
}

TEST_CASE("Poisson placement honours per-triangle rates", "[spatial]") {
    const Triangle far({10, 0}, {11, 0}, {10, 1});
    SECTION("zero rate yields no points from that triangle") {
        Domain d({unit_right, far}, {200.0, 0.0});
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto rng = make_stream(s, StreamPurpose::placement);
            for (auto p : sample_population(d, std::nullopt, rng)) REQUIRE(unit_right.contains(p));
        }
    }
    SECTION("rate 200 on area 1/2 gives counts inside the Poisson(100) bulk") {
        // P(60 <= Poisson(100) <= 140) = 0.99993
        Domain d({unit_right}, {200.0});
        int inside = 0;
        const int seeds = 400;
        for (int s = 0; s < seeds; ++s) {
            auto rng = make_stream(static_cast<std::uint64_t>(s), StreamPurpose::placement);
            const auto n = sample_population(d, std::nullopt, rng).size();
            inside += (n >= 60 && n <= 140);
        }
        REQUIRE(static_cast<double>(inside) / seeds >= 0.99);
    }
}

TEST_CASE("domain validation", "[spatial]") {
    REQUIRE_THROWS_AS(Domain({}, {}), ParameterError);
    REQUIRE_THROWS_AS(Domain({unit_right}, {-1.0}), ParameterError);
    REQUIRE_THROWS_AS(Domain({unit_right}, {1.0, 2.0}), ParameterError);
}

TEST_CASE("domain diameter", "[spatial]") {
    REQUIRE(domain_diameter(Domain(equilateral_triangle(1.0))) == Approx(1.0));
    REQUIRE(domain_diameter(Domain(unit_right)) == Approx(std::sqrt(2.0)));

    // Two unit right triangles, the second shifted by (10, 0): the farthest
    // vertex pair is (0,1)-(11,0), so brute force over all 15 pairs gives sqrt(122).
    Domain pair({unit_right, Triangle({10, 0}, {11, 0}, {10, 1})}, {1.0, 1.0});
    REQUIRE(domain_diameter(pair) == Approx(11.045361017187261));

    // Flat triangles along the x axis whose extreme pair is (0,0)-(11,0).
    Domain flat({Triangle({0, 0}, {1, 0}, {0.5, 0.1}), Triangle({10, 0}, {11, 0}, {10.5, 0.1})}, {1.0, 1.0});
    REQUIRE(domain_diameter(flat) == Approx(11.0));
}
