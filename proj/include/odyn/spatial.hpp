#ifndef ODYN_SPATIAL_HPP
#define ODYN_SPATIAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/random/poisson_distribution.hpp>

#include "odyn/errors.hpp"
#include "odyn/random.hpp"

namespace odyn {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 p) noexcept { return {s * p.x, s * p.y}; }
    friend constexpr bool operator==(Point2, Point2) = default;
};

inline double distance(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
constexpr double orient(Point2 a, Point2 b, Point2 c) noexcept {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Non-degenerate triangle. Construction rejects collinear or non-finite vertices.
class Triangle {
public:
    Triangle(Point2 t1, Point2 t2, Point2 t3) : t1_(t1), t2_(t2), t3_(t3) {
        for (Point2 p : {t1, t2, t3})
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw ParameterError("triangle vertex is not finite");
        if (!(area() > 0.0)) throw ParameterError("triangle is degenerate (zero area)");
    }

    Point2 t1() const noexcept { return t1_; }
    Point2 t2() const noexcept { return t2_; }
    Point2 t3() const noexcept { return t3_; }

    double area() const noexcept { return 0.5 * std::abs(orient(t1_, t2_, t3_)); }

    /// Affine image of the unit-square coordinates (u, v), u + v <= 1.
    Point2 at(double u, double v) const noexcept { return t1_ + u * (t2_ - t1_) + v * (t3_ - t1_); }

    /// Closed containment test with a small relative slack for rounding.
    bool contains(Point2 p, double slack = 1e-12) const noexcept {
        const double whole = orient(t1_, t2_, t3_);
        const double tol = slack * std::abs(whole);
        const double s1 = orient(t1_, t2_, p);
        const double s2 = orient(t2_, t3_, p);
        const double s3 = orient(t3_, t1_, p);
        if (whole > 0) return s1 >= -tol && s2 >= -tol && s3 >= -tol;
        return s1 <= tol && s2 <= tol && s3 <= tol;
    }

private:
    Point2 t1_, t2_, t3_;
};

/// Equilateral triangle with the given side, base on the x axis.
inline Triangle equilateral_triangle(double side = 1.0) {
    return Triangle({0.0, 0.0}, {side, 0.0}, {0.5 * side, 0.5 * std::sqrt(3.0) * side});
}

/// Union of triangles, each with its own Poisson intensity (expected agents per unit area).
struct Domain {
    std::vector<Triangle> triangles;
    std::vector<double> rates;

    Domain() = default;
    Domain(std::vector<Triangle> tris, std::vector<double> r) : triangles(std::move(tris)), rates(std::move(r)) {
        validate();
    }
    explicit Domain(Triangle tri) : triangles{tri}, rates{0.0} {}

    void validate() const {
        if (triangles.empty()) throw ParameterError("domain needs at least one triangle");
        if (rates.size() != triangles.size())
            throw ParameterError("domain rates must have one entry per triangle");
        for (double r : rates)
            if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("domain rates must be finite and >= 0");
    }

    double area() const noexcept {
        double a = 0.0;
        for (const auto& t : triangles) a += t.area();
        return a;
    }
};

/// Map a raw pair of unit draws onto the triangle, folding the upper half of
/// the unit square back onto the lower half.
inline Point2 fold_into_triangle(const Triangle& tri, double u, double v) noexcept {
    if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    return tri.at(u, v);
}

template <class Urbg>
Point2 sample_point_in_triangle(const Triangle& tri, Urbg& rng) {
    const double u = uniform01(rng);
    const double v = uniform01(rng);
    return fold_into_triangle(tri, u, v);
}

/// Agent locations. With `fixed_n`, exactly that many uniform points in the
/// (single) triangle; otherwise a Poisson point process with per-triangle rates.
template <class Urbg>
std::vector<Point2> sample_population(const Domain& domain, std::optional<std::size_t> fixed_n, Urbg& rng) {
    domain.validate();
    std::vector<Point2> points;
    if (fixed_n) {
        if (domain.triangles.size() != 1)
            throw ConfigError("n", "a fixed agent count requires a single-triangle domain");
        points.reserve(*fixed_n);
        for (std::size_t i = 0; i < *fixed_n; ++i) points.push_back(sample_point_in_triangle(domain.triangles[0], rng));
        return points;
    }
    for (std::size_t k = 0; k < domain.triangles.size(); ++k) {
        const double mean = domain.rates[k] * domain.triangles[k].area();
        if (mean <= 0.0) continue;
        boost::random::poisson_distribution<long long, double> count_dist(mean);
        const long long count = count_dist(rng);
        for (long long i = 0; i < count; ++i) points.push_back(sample_point_in_triangle(domain.triangles[k], rng));
    }
    return points;
}

/// Largest vertex-to-vertex distance; the farthest pair of a union of
/// triangles is always attained at vertices.
inline double domain_diameter(const Domain& domain) {
    std::vector<Point2> verts;
    verts.reserve(3 * domain.triangles.size());
    for (const auto& t : domain.triangles) {
        verts.push_back(t.t1());
        verts.push_back(t.t2());
        verts.push_back(t.t3());
    }
    double best = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j) best = std::max(best, distance(verts[i], verts[j]));
    return best;
}

} // namespace odyn

#endif // ODYN_SPATIAL_HPP
