#include "sff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sff/errors.hpp"

namespace sff {

void GridSpec::validate() const {
    if (!(cell > 0.0)) throw ValidationError("grid cell size must be positive");
    if (width <= 0 || height <= 0) throw ValidationError("grid dimensions must be positive");
    if (!std::isfinite(origin.x) || !std::isfinite(origin.y))
        throw ValidationError("grid origin must be finite");
}

bool GridSpec::operator==(const GridSpec& o) const {
    return origin == o.origin && cell == o.cell && width == o.width && height == o.height;
}

bool GridSpec::contains(const Vec2& p) const {
    return p.x >= origin.x && p.y >= origin.y && p.x < origin.x + width * cell &&
           p.y < origin.y + height * cell;
}

GridSpec make_window(const Aabb& box, double margin, double cell) {
    if (!(cell > 0.0)) throw ValidationError("grid cell size must be positive");
    GridSpec spec;
    spec.cell = cell;
    spec.origin = {std::floor((box.lo.x - margin) / cell) * cell,
                   std::floor((box.lo.y - margin) / cell) * cell};
    spec.width = static_cast<int>(std::ceil((box.hi.x + margin - spec.origin.x) / cell));
    spec.height = static_cast<int>(std::ceil((box.hi.y + margin - spec.origin.y) / cell));
    spec.validate();
    return spec;
}

ClaimedSetGrid ClaimedSetGrid::zeros(const GridSpec& s) {
    s.validate();
    return {s, std::vector<std::uint8_t>(s.size(), 0)};
}

std::size_t ClaimedSetGrid::count() const {
    std::size_t n = 0;
    for (std::uint8_t v : occupancy) n += v != 0;
    return n;
}

kernels::Region ClaimedSetGrid::bounds() const {
    return kernels::occupied_bounds(spec.width, spec.height, occupancy.data());
}

SmoothField SmoothField::zeros(const GridSpec& s) {
    s.validate();
    return {s, std::vector<double>(s.size(), 0.0)};
}

double SmoothField::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

std::size_t SmoothField::nonzero_count(double threshold) const {
    std::size_t n = 0;
    for (double v : values) n += v > threshold;
    return n;
}

MollifierKernel mollifier_kernel(double radius, double cell, bool identity) {
    if (!(cell > 0.0)) throw ValidationError("kernel cell size must be positive");
    if (identity) return {radius, cell, 0, true, {1.0}};
    if (!(radius >= cell))
        throw ValidationError("mollifier radius below cell size collapses to a single tap; "
                              "request the identity kernel explicitly");
    MollifierKernel k;
    k.radius = radius;
    k.cell = cell;
    k.half = static_cast<int>(std::ceil(radius / cell));
    const int side = k.side();
    k.taps.assign(static_cast<std::size_t>(side) * side, 0.0);
    double sum = 0.0;
    for (int dy = -k.half; dy <= k.half; ++dy)
        for (int dx = -k.half; dx <= k.half; ++dx) {
            const double d = cell * std::hypot(dx, dy);
            if (d >= radius) continue;
            const double q = d / radius;
            const double w = std::exp(-1.0 / (1.0 - q * q));
            k.taps[static_cast<std::size_t>(dy + k.half) * side + (dx + k.half)] = w;
            sum += w;
        }
    for (double& w : k.taps) w /= sum;
    return k;
}

void stamp_polygon(ClaimedSetGrid& grid, const Polygon& poly) {
    const Aabb box = polygon_bounds(poly);
    const GridSpec& s = grid.spec;
    const int x0 = std::max(0, static_cast<int>(std::floor((box.lo.x - s.origin.x) / s.cell)));
    const int y0 = std::max(0, static_cast<int>(std::floor((box.lo.y - s.origin.y) / s.cell)));
    const int x1 = std::min(s.width - 1, static_cast<int>(std::floor((box.hi.x - s.origin.x) / s.cell)));
    const int y1 = std::min(s.height - 1, static_cast<int>(std::floor((box.hi.y - s.origin.y) / s.cell)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (point_in_convex(poly, s.center(x, y))) grid.occupancy[s.index(x, y)] = 1;
}

ClaimedSetGrid stamp_trajectories(const std::vector<Trajectory>& rollouts,
                                  const VehicleShape& shape, const GridSpec& spec, bool clip) {
    ClaimedSetGrid grid = ClaimedSetGrid::zeros(spec);
    Aabb needed{{0, 0}, {0, 0}};
    bool overflow = false;
    const Vec2 win_lo = spec.origin;
    const Vec2 win_hi = {spec.origin.x + spec.width * spec.cell,
                         spec.origin.y + spec.height * spec.cell};
    for (const Trajectory& traj : rollouts)
        for (const ActorState& s : traj.samples) {
            const Polygon fp = footprint_polygon(s, shape);
            if (!clip) {
                const Aabb box = polygon_bounds(fp);
                if (box.lo.x < win_lo.x || box.lo.y < win_lo.y || box.hi.x > win_hi.x ||
                    box.hi.y > win_hi.y) {
                    needed = overflow ? needed.expanded(box.lo).expanded(box.hi)
                                      : Aabb{box.lo, box.hi};
                    overflow = true;
                    continue;
                }
            }
            stamp_polygon(grid, fp);
        }
    if (overflow) {
        std::ostringstream msg;
        msg << "claimed set exceeds grid window: needs x in [" << needed.lo.x << ", "
            << needed.hi.x << "], y in [" << needed.lo.y << ", " << needed.hi.y
            << "], window covers x in [" << win_lo.x << ", " << win_hi.x << "], y in ["
            << win_lo.y << ", " << win_hi.y << "]";
        throw WindowOverflowError(msg.str());
    }
    return grid;
}

namespace {

ClaimedSetGrid claimed_set_impl(const ActorState& state, const VehicleShape& shape,
                                const SafetyProcedure& proc, const GridSpec& spec, bool clip) {
    spec.validate();
    proc.validate();
    std::vector<Trajectory> rollouts;
    rollouts.reserve(proc.policies.size());
    for (const PolicyParams& p : proc.policies)
        rollouts.push_back(rollout(state, shape, p, proc.horizon, proc.dt));
    return stamp_trajectories(rollouts, shape, spec, clip);
}

}  // namespace

ClaimedSetGrid claimed_set(const ActorState& state, const VehicleShape& shape,
                           const SafetyProcedure& proc, const GridSpec& spec) {
    return claimed_set_impl(state, shape, proc, spec, false);
}

ClaimedSetGrid claimed_set_clipped(const ActorState& state, const VehicleShape& shape,
                                   const SafetyProcedure& proc, const GridSpec& spec) {
    return claimed_set_impl(state, shape, proc, spec, true);
}

namespace {

SmoothField mollify_impl(const ClaimedSetGrid& g, const MollifierKernel& k, bool clipped) {
    g.spec.validate();
    if (!k.identity && k.cell != g.spec.cell)
        throw ValidationError("kernel was discretized for a different cell size");
    SmoothField f = SmoothField::zeros(g.spec);
    const kernels::Region occ = g.bounds();
    if (occ.empty()) return f;
    if (k.identity) {
        for (std::size_t i = 0; i < g.occupancy.size(); ++i) f.values[i] = g.occupancy[i] ? 1.0 : 0.0;
        return f;
    }
    if (!clipped) {
        if (occ.x0 < k.half || occ.y0 < k.half || occ.x1 >= g.spec.width - k.half ||
            occ.y1 >= g.spec.height - k.half)
            throw ValidationError("occupied cells sit within kernel radius of the window border");
    }
    const kernels::Region r = occ.dilated(k.half).clipped(g.spec.width, g.spec.height);
    kernels::par::convolve(g.spec.width, g.spec.height, g.occupancy.data(), k.taps.data(), k.half,
                           r, f.values.data());
    for (double& v : f.values) v = std::min(v, 1.0);
    return f;
}

}  // namespace

SmoothField mollify(const ClaimedSetGrid& g, const MollifierKernel& k) {
    return mollify_impl(g, k, false);
}

SmoothField mollify_clipped(const ClaimedSetGrid& g, const MollifierKernel& k) {
    return mollify_impl(g, k, true);
}

// --- 16-bit PGM dump ------------------------------------------------------

void SmoothField::save_pgm(const std::string& path, double scale) const {
    if (!(scale > 0.0)) throw ValidationError("pgm scale must be positive");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    char meta[160];
    std::snprintf(meta, sizeof meta, "# field origin %.17g %.17g cell %.17g scale %.17g\n",
                  spec.origin.x, spec.origin.y, spec.cell, scale);
    out << "P5\n" << meta << spec.width << " " << spec.height << "\n65535\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(spec.width) * 2);
    for (int y = spec.height - 1; y >= 0; --y) {  // image rows top to bottom
        for (int x = 0; x < spec.width; ++x) {
            double v = values[spec.index(x, y)] / scale;
            v = std::clamp(v, 0.0, 1.0);
            const unsigned q = static_cast<unsigned>(std::lround(v * 65535.0));
            row[2 * x] = static_cast<unsigned char>(q >> 8);
            row[2 * x + 1] = static_cast<unsigned char>(q & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

SmoothField SmoothField::load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string magic;
    in >> magic;
    if (magic != "P5") throw ValidationError("'" + path + "' is not a binary pgm");
    GridSpec spec;
    double scale = 1.0;
    bool have_meta = false;
    // header tokens with # comments interleaved; our own comment carries the frame
    std::vector<long> dims;
    while (dims.size() < 3) {
        in >> std::ws;
        if (in.peek() == '#') {
            std::string line;
            std::getline(in, line);
            double ox, oy, c, sc;
            if (std::sscanf(line.c_str(), "# field origin %lf %lf cell %lf scale %lf", &ox, &oy,
                            &c, &sc) == 4) {
                spec.origin = {ox, oy};
                spec.cell = c;
                scale = sc;
                have_meta = true;
            }
            continue;
        }
        long v;
        if (!(in >> v)) throw ValidationError("'" + path + "' has a malformed pgm header");
        dims.push_back(v);
    }
    if (!have_meta) throw ValidationError("'" + path + "' lacks the field frame comment");
    if (dims[2] != 65535) throw ValidationError("'" + path + "' must be 16-bit");
    spec.width = static_cast<int>(dims[0]);
    spec.height = static_cast<int>(dims[1]);
    spec.validate();
    in.get();  // single whitespace after maxval
    SmoothField f = SmoothField::zeros(spec);
    std::vector<unsigned char> row(static_cast<std::size_t>(spec.width) * 2);
    for (int y = spec.height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw ValidationError("'" + path + "' is truncated");
        for (int x = 0; x < spec.width; ++x) {
            const unsigned q = (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1];
            f.values[spec.index(x, y)] = q / 65535.0 * scale;
        }
    }
    return f;
}

}  // namespace sff
