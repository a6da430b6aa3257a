#pragma once

#include <cstdint>

namespace sff::kernels {

// Inclusive cell-index rectangle. Kernels only touch cells inside it, so
// callers can exploit sparse occupancy.
struct Region {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;

    bool empty() const { return x1 < x0 || y1 < y0; }
    Region clipped(int width, int height) const;
    Region dilated(int r) const { return {x0 - r, y0 - r, x1 + r, y1 + r}; }
};

// Tight bounds of nonzero occupancy; empty Region if all zero.
Region occupied_bounds(int width, int height, const std::uint8_t* occ);

// Both namespaces compute identical results bit for bit: the parallel
// variants split work by row and never reorder arithmetic within a row,
// and reductions sum per-row partials in a fixed row order.
namespace serial {

// out(x,y) = sum over taps of taps[..] * occ(x-dx, y-dy), zero outside the
// grid. Writes only inside `r`; the caller zeroes `out` beforehand.
void convolve(int width, int height, const std::uint8_t* occ, const double* taps, int half,
              Region r, double* out);

// scale * sum over `r` of a(c) * b(c), accumulated row-major.
double masked_dot(int width, const double* a, const double* b, Region r, double scale);

}  // namespace serial

namespace par {

void convolve(int width, int height, const std::uint8_t* occ, const double* taps, int half,
              Region r, double* out);
double masked_dot(int width, const double* a, const double* b, Region r, double scale);

}  // namespace par

}  // namespace sff::kernels
