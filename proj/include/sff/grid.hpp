#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sff/geometry.hpp"
#include "sff/kernels.hpp"
#include "sff/procedure.hpp"
#include "sff/vehicle.hpp"

namespace sff {

struct GridSpec {
    Vec2 origin;       // world position of the low corner of cell (0,0)
    double cell = 0.5; // m per cell
    int width = 0, height = 0;

    void validate() const;
    bool operator==(const GridSpec& o) const;
    std::size_t size() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    Vec2 center(int x, int y) const {
        return {origin.x + (x + 0.5) * cell, origin.y + (y + 0.5) * cell};
    }
    bool contains(const Vec2& p) const;
    double cell_area() const { return cell * cell; }
};

// Window covering `box` with `margin` meters on every side, aligned to the
// global cell lattice so rasterization does not depend on where the window
// sits.
GridSpec make_window(const Aabb& box, double margin, double cell);

struct ClaimedSetGrid {
    GridSpec spec;
    std::vector<std::uint8_t> occupancy;

    static ClaimedSetGrid zeros(const GridSpec& spec);
    std::size_t count() const;
    kernels::Region bounds() const;
};

struct SmoothField {
    GridSpec spec;
    std::vector<double> values;

    static SmoothField zeros(const GridSpec& spec);
    double max_value() const;
    std::size_t nonzero_count(double threshold = 0.0) const;

    // 16-bit PGM with a metadata comment, loadable back without sidecars.
    void save_pgm(const std::string& path, double scale = 1.0) const;
    static SmoothField load_pgm(const std::string& path);
};

struct MollifierKernel {
    double radius = 1.5;      // m
    double cell = 0.5;        // m, grid it was discretized for
    int half = 0;             // taps span (2*half+1)^2
    bool identity = false;
    std::vector<double> taps; // normalized to sum 1

    int side() const { return 2 * half + 1; }
    double tap(int dx, int dy) const {
        return taps[static_cast<std::size_t>(dy + half) * side() + (dx + half)];
    }
};

// Compactly supported bump profile exp(-1 / (1 - (d/radius)^2)) sampled at
// cell offsets and normalized. radius below cell is only meaningful as the
// single-tap identity, which must be requested explicitly.
MollifierKernel mollifier_kernel(double radius, double cell, bool identity = false);

// Marks every cell whose center lies inside the convex polygon.
void stamp_polygon(ClaimedSetGrid& grid, const Polygon& poly);

// Union of swept footprints over every policy rollout. Throws
// WindowOverflowError when a footprint leaves the window.
ClaimedSetGrid claimed_set(const ActorState& state, const VehicleShape& shape,
                           const SafetyProcedure& proc, const GridSpec& spec);

// Same union but silently clipped to the window. Pair potentials use this on
// lens windows that deliberately cover only the region where the product of
// the two fields can be nonzero.
ClaimedSetGrid claimed_set_clipped(const ActorState& state, const VehicleShape& shape,
                                   const SafetyProcedure& proc, const GridSpec& spec);

// Stamps the footprints of an already computed rollout set.
ClaimedSetGrid stamp_trajectories(const std::vector<Trajectory>& rollouts,
                                  const VehicleShape& shape, const GridSpec& spec, bool clip);

// Convolution with the kernel, clamped to [0, 1]. Occupied cells must be at
// least `half` cells from the border (windows are padded by the kernel
// radius); the clipped pair path uses mollify_clipped instead.
SmoothField mollify(const ClaimedSetGrid& g, const MollifierKernel& k);
SmoothField mollify_clipped(const ClaimedSetGrid& g, const MollifierKernel& k);

}  // namespace sff
