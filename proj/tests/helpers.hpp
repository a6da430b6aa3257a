#pragma once

// Oracles and scaffolding shared by the test suites. The geometry here is
// deliberately written from first principles (hull, half-plane clipping,
// shoelace) so it can disagree with the library under test.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sff/geometry.hpp"
#include "sff/rng.hpp"

namespace testutil {

using sff::Vec2;

inline double cross3(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain, CCW output.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Sutherland-Hodgman clip of one convex CCW polygon by another.
inline std::vector<Vec2> clip_convex(std::vector<Vec2> subject, const std::vector<Vec2>& clip) {
    for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
        const Vec2 a = clip[i];
        const Vec2 b = clip[(i + 1) % clip.size()];
        std::vector<Vec2> out;
        for (std::size_t j = 0; j < subject.size(); ++j) {
            const Vec2 p = subject[j];
            const Vec2 q = subject[(j + 1) % subject.size()];
            const double sp = cross3(a, b, p);
            const double sq = cross3(a, b, q);
            if (sp >= 0.0) out.push_back(p);
            if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
                const double t = sp / (sp - sq);
                out.push_back({p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t});
            }
        }
        subject = std::move(out);
    }
    return subject;
}

inline double shoelace(const std::vector<Vec2>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % p.size()];
        s += a.x * b.y - a.y * b.x;
    }
    return 0.5 * s;
}

inline double perimeter(const std::vector<Vec2>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % p.size()];
        s += std::hypot(b.x - a.x, b.y - a.y);
    }
    return s;
}

// Random convex polygon with positive area: hull of scattered points.
inline std::vector<Vec2> random_convex(sff::Rng& rng, double extent) {
    for (;;) {
        std::vector<Vec2> pts;
        const int n = 3 + static_cast<int>(rng.uniform_index(7));
        for (int i = 0; i < n; ++i)
            pts.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent)});
        std::vector<Vec2> hull = convex_hull(pts);
        if (hull.size() >= 3 && shoelace(hull) > 1e-3) return hull;
    }
}

// Fresh scratch directory under the test's working directory.
inline std::string test_dir(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::path("scratch") / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testutil
