#include "sff/geometry.hpp"

#include <algorithm>
#include <limits>

#include "sff/errors.hpp"

namespace sff {

double normalize_angle(double a) {
    double r = std::remainder(a, 2.0 * M_PI);
    if (r <= -M_PI) r += 2.0 * M_PI;
    return r;
}

double polygon_area(const Polygon& p) {
    double acc = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % n];
        acc += cross(a, b);
    }
    return 0.5 * acc;
}

bool point_in_convex(const Polygon& poly, const Vec2& p) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 edge = poly[(i + 1) % n] - poly[i];
        if (cross(edge, p - poly[i]) < 0.0) return false;
    }
    return true;
}

namespace {

// Projection interval of a polygon onto a unit-free axis.
void project(const Polygon& p, const Vec2& axis, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const Vec2& v : p) {
        const double d = dot(v, axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
}

bool separated_on_edges(const Polygon& a, const Polygon& b) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 axis = (a[(i + 1) % n] - a[i]).perp();
        double alo, ahi, blo, bhi;
        project(a, axis, alo, ahi);
        project(b, axis, blo, bhi);
        // touching intervals have zero overlap width: not a positive-area intersection
        if (std::min(ahi, bhi) - std::max(alo, blo) <= 0.0) return true;
    }
    return false;
}

}  // namespace

bool polygons_overlap(const Polygon& a, const Polygon& b) {
    if (a.size() < 3 || b.size() < 3 || std::abs(polygon_area(a)) < 1e-12 ||
        std::abs(polygon_area(b)) < 1e-12) {
        throw ValidationError("polygons_overlap: degenerate polygon");
    }
    return !separated_on_edges(a, b) && !separated_on_edges(b, a);
}

Aabb polygon_bounds(const Polygon& p) {
    Aabb box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
             {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
    for (const Vec2& v : p) {
        box.lo.x = std::min(box.lo.x, v.x);
        box.lo.y = std::min(box.lo.y, v.y);
        box.hi.x = std::max(box.hi.x, v.x);
        box.hi.y = std::max(box.hi.y, v.y);
    }
    return box;
}

PolylineHit project_to_polyline(const std::vector<Vec2>& pts, const Vec2& p) {
    PolylineHit best;
    best.distance = std::numeric_limits<double>::infinity();
    double arc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        const Vec2 ab = b - a;
        const double len2 = ab.norm2();
        double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 q = a + ab * t;
        const double d = (p - q).norm();
        if (d < best.distance) {
            best.distance = d;
            best.point = q;
            best.segment = i;
            best.arclen = arc + std::sqrt(len2) * t;
        }
        arc += std::sqrt(len2);
    }
    if (pts.size() == 1) {
        best.distance = (p - pts[0]).norm();
        best.point = pts[0];
        best.arclen = 0.0;
    }
    return best;
}

double polyline_length(const std::vector<Vec2>& pts) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc += (pts[i + 1] - pts[i]).norm();
    return acc;
}

Vec2 polyline_at(const std::vector<Vec2>& pts, double arclen) {
    if (pts.empty()) return {};
    if (arclen <= 0.0) return pts.front();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double seg = (pts[i + 1] - pts[i]).norm();
        if (acc + seg >= arclen && seg > 0.0) {
            const double t = (arclen - acc) / seg;
            return pts[i] + (pts[i + 1] - pts[i]) * t;
        }
        acc += seg;
    }
    return pts.back();
}

}  // namespace sff
