#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace sff {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
    // left-hand normal
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

// Convex polygon, CCW winding.
using Polygon = std::vector<Vec2>;

// Wrap into (-pi, pi].
double normalize_angle(double a);

// Signed shoelace area (positive for CCW).
double polygon_area(const Polygon& p);

// Inclusive test against a CCW convex polygon (boundary counts as inside).
bool point_in_convex(const Polygon& poly, const Vec2& p);

// Separating-axis decision: true iff the intersection has positive area.
// Throws ValidationError for degenerate (zero-area) input.
bool polygons_overlap(const Polygon& a, const Polygon& b);

// Axis-aligned bounds of a polygon.
struct Aabb {
    Vec2 lo, hi;

    Aabb expanded(const Vec2& p) const {
        return {{std::min(lo.x, p.x), std::min(lo.y, p.y)},
                {std::max(hi.x, p.x), std::max(hi.y, p.y)}};
    }
};
Aabb polygon_bounds(const Polygon& p);

// Distance from point to a polyline, plus the arc length of the projection.
struct PolylineHit {
    double distance = 0.0;   // unsigned lateral distance
    double arclen = 0.0;     // arc length from the first vertex
    std::size_t segment = 0; // index of the segment containing the projection
    Vec2 point;              // closest point on the polyline
};
PolylineHit project_to_polyline(const std::vector<Vec2>& pts, const Vec2& p);

double polyline_length(const std::vector<Vec2>& pts);

// Point at a given arc length (clamped to the ends).
Vec2 polyline_at(const std::vector<Vec2>& pts, double arclen);

}  // namespace sff
