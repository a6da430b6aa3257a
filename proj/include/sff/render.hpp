#pragma once

#include <string>
#include <vector>

#include "sff/grid.hpp"
#include "sff/world.hpp"

namespace sff {

struct RenderOptions {
    double scale = 4.0;        // px per m
    double margin = 15.0;      // m around the content bounds
    double dot_radius = 1.5;   // m
    double min_opacity = 0.01; // field cells below this are skipped
};

// Scene as SVG: grey roads, red field cells with opacity equal to the cell
// value, a green dot for actor id 0, yellow dots for the rest, and one
// phase-colored marker per signal axis. Field cells draw under the dots.
// All numbers are printed with fixed precision so identical inputs yield
// byte-identical output.
std::string render_svg(const WorldState& world, const std::vector<SmoothField>& fields,
                       const RenderOptions& opt = {});

}  // namespace sff
