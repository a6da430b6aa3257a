#include "sff/render.hpp"

#include <cmath>
#include <cstdio>

#include "sff/errors.hpp"

namespace sff {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

const char* phase_color(SignalPhase phase) {
    switch (phase) {
        case SignalPhase::Green: return "#1a8f1a";
        case SignalPhase::Yellow: return "#e6b800";
        case SignalPhase::Red: return "#cc2222";
    }
    return "#888888";
}

}  // namespace

std::string render_svg(const WorldState& world, const std::vector<SmoothField>& fields,
                       const RenderOptions& opt) {
    if (!(opt.scale > 0.0)) throw ValidationError("render scale must be positive");

    Aabb box{{0.0, 0.0}, {0.0, 0.0}};
    bool seeded = false;
    const auto grow = [&](const Vec2& p) {
        if (!seeded) {
            box = {p, p};
            seeded = true;
        } else {
            box = box.expanded(p);
        }
    };
    if (world.map)
        for (const LaneSegment& lane : world.map->lanes)
            for (const Vec2& p : lane.centerline) grow(p);
    for (const Actor& a : world.actors) grow(a.state.position);
    for (const SmoothField& f : fields) {
        grow(f.spec.origin);
        grow(f.spec.origin + Vec2{f.spec.width * f.spec.cell, f.spec.height * f.spec.cell});
    }
    if (!seeded) box = {{-10.0, -10.0}, {10.0, 10.0}};
    box.lo += Vec2{-opt.margin, -opt.margin};
    box.hi += Vec2{opt.margin, opt.margin};

    const double s = opt.scale;
    const double width = (box.hi.x - box.lo.x) * s;
    const double height = (box.hi.y - box.lo.y) * s;
    const auto px = [&](double x) { return (x - box.lo.x) * s; };
    const auto py = [&](double y) { return (box.hi.y - y) * s; }; // y grows up in world space

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    svg += "<rect width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"#fafafa\"/>\n";

    if (world.map) {
        for (const LaneSegment& lane : world.map->lanes) {
            svg += "<polyline fill=\"none\" stroke=\"#b0b0b0\" stroke-linecap=\"round\" "
                   "stroke-width=\"" +
                   num(lane.width * s) + "\" points=\"";
            for (std::size_t i = 0; i < lane.centerline.size(); ++i) {
                if (i) svg += ' ';
                svg += num(px(lane.centerline[i].x)) + "," + num(py(lane.centerline[i].y));
            }
            svg += "\"/>\n";
        }
    }

    for (const SmoothField& f : fields) {
        for (int y = 0; y < f.spec.height; ++y) {
            for (int x = 0; x < f.spec.width; ++x) {
                const double v = f.values[f.spec.index(x, y)];
                if (v <= opt.min_opacity) continue;
                const Vec2 lo = f.spec.origin + Vec2{x * f.spec.cell, y * f.spec.cell};
                svg += "<rect x=\"" + num(px(lo.x)) + "\" y=\"" +
                       num(py(lo.y + f.spec.cell)) + "\" width=\"" + num(f.spec.cell * s) +
                       "\" height=\"" + num(f.spec.cell * s) + "\" fill=\"#d22\" opacity=\"" +
                       num(v) + "\"/>\n";
            }
        }
    }

    if (world.map) {
        for (const TrafficLightState& light : world.lights) {
            const Intersection& node = world.map->node(light.intersection);
            if (!node.signalized) continue;
            const double r = 0.9 * s;
            const Vec2 ew = node.position + Vec2{world.map->node_half, 0.0};
            const Vec2 ns = node.position + Vec2{0.0, world.map->node_half};
            svg += "<circle cx=\"" + num(px(ew.x)) + "\" cy=\"" + num(py(ew.y)) + "\" r=\"" +
                   num(r) + "\" fill=\"" + phase_color(light.ew) + "\"/>\n";
            svg += "<circle cx=\"" + num(px(ns.x)) + "\" cy=\"" + num(py(ns.y)) + "\" r=\"" +
                   num(r) + "\" fill=\"" + phase_color(light.ns) + "\"/>\n";
        }
    }

    for (const Actor& a : world.actors) {
        const bool ego = a.state.id == 0;
        svg += "<circle cx=\"" + num(px(a.state.position.x)) + "\" cy=\"" +
               num(py(a.state.position.y)) + "\" r=\"" + num(opt.dot_radius * s) +
               "\" fill=\"" + (ego ? "#1db31d" : "#e6c319") + "\"/>\n";
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace sff
