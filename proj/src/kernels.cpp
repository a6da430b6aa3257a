#include "sff/kernels.hpp"

#include <algorithm>
#include <vector>

namespace sff::kernels {

Region Region::clipped(int width, int height) const {
    return {std::max(x0, 0), std::max(y0, 0), std::min(x1, width - 1), std::min(y1, height - 1)};
}

Region occupied_bounds(int width, int height, const std::uint8_t* occ) {
    Region r{width, height, -1, -1};
    for (int y = 0; y < height; ++y) {
        const std::uint8_t* row = occ + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            if (!row[x]) continue;
            r.x0 = std::min(r.x0, x);
            r.y0 = std::min(r.y0, y);
            r.x1 = std::max(r.x1, x);
            r.y1 = std::max(r.y1, y);
        }
    }
    if (r.x1 < r.x0) return {};
    return r;
}

namespace {

inline void convolve_row(int width, int height, const std::uint8_t* occ, const double* taps,
                         int half, int y, int x0, int x1, double* out) {
    const int side = 2 * half + 1;
    double* orow = out + static_cast<std::size_t>(y) * width;
    for (int x = x0; x <= x1; ++x) {
        double acc = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
            const int sy = y - dy;
            if (sy < 0 || sy >= height) continue;
            const std::uint8_t* srow = occ + static_cast<std::size_t>(sy) * width;
            const double* trow = taps + static_cast<std::size_t>(dy + half) * side;
            for (int dx = -half; dx <= half; ++dx) {
                const int sx = x - dx;
                if (sx < 0 || sx >= width) continue;
                if (srow[sx]) acc += trow[dx + half];
            }
        }
        orow[x] = acc;
    }
}

inline double dot_row(int width, const double* a, const double* b, int y, int x0, int x1) {
    const double* ar = a + static_cast<std::size_t>(y) * width;
    const double* br = b + static_cast<std::size_t>(y) * width;
    double acc = 0.0;
    for (int x = x0; x <= x1; ++x) acc += ar[x] * br[x];
    return acc;
}

}  // namespace

namespace serial {

void convolve(int width, int height, const std::uint8_t* occ, const double* taps, int half,
              Region r, double* out) {
    r = r.clipped(width, height);
    if (r.empty()) return;
    for (int y = r.y0; y <= r.y1; ++y)
        convolve_row(width, height, occ, taps, half, y, r.x0, r.x1, out);
}

double masked_dot(int width, const double* a, const double* b, Region r, double scale) {
    if (r.empty()) return 0.0;
    double total = 0.0;
    for (int y = r.y0; y <= r.y1; ++y) total += dot_row(width, a, b, y, r.x0, r.x1);
    return total * scale;
}

}  // namespace serial

namespace par {

void convolve(int width, int height, const std::uint8_t* occ, const double* taps, int half,
              Region r, double* out) {
    r = r.clipped(width, height);
    if (r.empty()) return;
#pragma omp parallel for schedule(static)
    for (int y = r.y0; y <= r.y1; ++y)
        convolve_row(width, height, occ, taps, half, y, r.x0, r.x1, out);
}

double masked_dot(int width, const double* a, const double* b, Region r, double scale) {
    if (r.empty()) return 0.0;
    const int rows = r.y1 - r.y0 + 1;
    std::vector<double> partial(static_cast<std::size_t>(rows), 0.0);
#pragma omp parallel for schedule(static)
    for (int y = r.y0; y <= r.y1; ++y)
        partial[static_cast<std::size_t>(y - r.y0)] = dot_row(width, a, b, y, r.x0, r.x1);
    double total = 0.0;
    for (double p : partial) total += p;
    return total * scale;
}

}  // namespace par

}  // namespace sff::kernels
