#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sff/geometry.hpp"

namespace sff {

using NodeId = std::uint32_t;
using LaneId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);
inline constexpr LaneId kNoLane = static_cast<LaneId>(-1);

struct Intersection {
    NodeId id = 0;
    Vec2 position;
    bool signalized = true;
    double cycle_offset = 0.0;  // s, shifts this light's cycle
};

// One directed lane: a centerline polyline from one node toward another.
struct LaneSegment {
    LaneId id = 0;
    NodeId from = 0;
    NodeId to = 0;
    std::vector<Vec2> centerline;
    double width = 3.5;        // m
    double speed_limit = 14.0; // m/s
    int axis = 0;              // 0 = east-west travel, 1 = north-south travel
    int lane_index = 0;        // 0 = innermost of its direction
    std::uint32_t road = 0;    // undirected road this lane belongs to
    double length = 0.0;

    Vec2 direction_at(double arclen) const;
    double heading_at(double arclen) const { const Vec2 d = direction_at(arclen); return std::atan2(d.y, d.x); }
};

// Per-axis signal plan shared by every light. One full cycle is
// green + yellow on one axis while the other holds red, then the axes swap.
struct SignalTiming {
    double green = 10.0;
    double yellow = 3.0;
    double red = 13.0;  // must equal green + yellow of the opposing axis

    double cycle() const { return green + yellow + red; }
};

enum class SignalPhase { Green, Yellow, Red };

struct TrafficLightState {
    NodeId intersection = 0;
    SignalPhase ew = SignalPhase::Red;
    SignalPhase ns = SignalPhase::Red;
};

struct MapGraph {
    std::vector<Intersection> nodes;
    std::vector<LaneSegment> lanes;
    SignalTiming timing;
    double node_half = 6.0;  // m, half-extent of the intersection box / stop-line setback

    const Intersection& node(NodeId id) const;
    const LaneSegment& lane(LaneId id) const;
    // lanes leaving `node` (U-turns included; routing rarely picks them)
    const std::vector<LaneId>& outgoing(NodeId node) const;
    // adjacent same-direction lane on the same road, if any
    std::optional<LaneId> adjacent_lane(LaneId id) const;
    double total_lane_length() const;

    void validate() const;  // throws unless strongly connected and well formed

    nlohmann::json to_json() const;
    static MapGraph from_json(const nlohmann::json& j);

private:
    friend MapGraph build_grid_town(int, int, double, int, double, double);
    mutable std::vector<std::vector<LaneId>> outgoing_;  // built lazily
    void build_index() const;
};

// Signal phase seen by traffic traveling on `axis` through `node` at time t.
SignalPhase signal_phase(const MapGraph& map, NodeId node, int axis, double time);
std::vector<TrafficLightState> lights_at(const MapGraph& map, double time);

// Manhattan grid town: rows x cols signalized intersections joined by two-way
// roads of `block` meters with `lanes_per_dir` lanes each way. A 1x1 grid has
// no interior road at all, so that case gets four boundary stub roads to stay
// drivable.
MapGraph build_grid_town(int rows, int cols, double block, int lanes_per_dir,
                         double lane_width = 3.5, double speed_limit = 14.0);

// --- routing -----------------------------------------------------------

struct LanePoint {
    LaneId lane = kNoLane;
    double s = 0.0;  // arc length along the lane centerline
};

struct RoutePlan {
    std::vector<LaneId> lanes;
    std::vector<Vec2> polyline;     // concatenated centerlines incl. junction chords
    std::vector<double> arclen;     // cumulative arc length per polyline point
    std::vector<LaneId> point_lane; // lane owning each polyline point
    Vec2 destination;
    double total_length = 0.0;

    LaneId lane_at_arclen(double s) const;
};

// Shortest network distance between two lane points; +inf if unreachable.
double network_distance(const MapGraph& map, const LanePoint& from, const LanePoint& to);

// Shortest-path route; throws LookupError for invalid lane ids.
RoutePlan plan_route(const MapGraph& map, const LanePoint& from, const LanePoint& to);

// Closest lane point to a world position (by centerline distance).
LanePoint nearest_lane_point(const MapGraph& map, const Vec2& p);

// --- drivable-area raster ----------------------------------------------

// Coarse bitmap of road surface, used for bird-eye-view features and the
// renderer background.
struct DrivableMap {
    Vec2 origin;
    double cell = 1.0;
    int width = 0, height = 0;
    std::vector<std::uint8_t> cells;

    bool drivable(const Vec2& p) const;
};

DrivableMap build_drivable_map(const MapGraph& map, double cell = 1.0);

}  // namespace sff
