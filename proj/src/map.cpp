#include "sff/map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <unordered_map>

#include "sff/errors.hpp"

namespace sff {

Vec2 LaneSegment::direction_at(double arclen) const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < centerline.size(); ++i) {
        const Vec2 seg = centerline[i + 1] - centerline[i];
        const double len = seg.norm();
        if (arclen <= s + len || i + 2 == centerline.size()) {
            if (len <= 0.0) throw ValidationError("lane has zero-length segment");
            return seg * (1.0 / len);
        }
        s += len;
    }
    throw ValidationError("lane has no segments");
}

const Intersection& MapGraph::node(NodeId id) const {
    if (id >= nodes.size()) throw LookupError("unknown node id " + std::to_string(id));
    return nodes[id];
}

const LaneSegment& MapGraph::lane(LaneId id) const {
    if (id >= lanes.size()) throw LookupError("unknown lane id " + std::to_string(id));
    return lanes[id];
}

void MapGraph::build_index() const {
    outgoing_.assign(nodes.size(), {});
    for (const LaneSegment& l : lanes) outgoing_[l.from].push_back(l.id);
}

const std::vector<LaneId>& MapGraph::outgoing(NodeId n) const {
    if (outgoing_.size() != nodes.size()) build_index();
    if (n >= nodes.size()) throw LookupError("unknown node id " + std::to_string(n));
    return outgoing_[n];
}

std::optional<LaneId> MapGraph::adjacent_lane(LaneId id) const {
    const LaneSegment& l = lane(id);
    for (const LaneSegment& o : lanes) {
        if (o.id == l.id || o.road != l.road) continue;
        if (o.from != l.from || o.to != l.to) continue;
        if (std::abs(o.lane_index - l.lane_index) == 1) return o.id;
    }
    return std::nullopt;
}

double MapGraph::total_lane_length() const {
    double sum = 0.0;
    for (const LaneSegment& l : lanes) sum += l.length;
    return sum;
}

void MapGraph::validate() const {
    if (nodes.empty()) throw ValidationError("map has no intersections");
    if (lanes.empty()) throw ValidationError("map has no lanes");
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id != i) throw ValidationError("node ids must be dense and ordered");
    for (std::size_t i = 0; i < lanes.size(); ++i) {
        const LaneSegment& l = lanes[i];
        if (l.id != i) throw ValidationError("lane ids must be dense and ordered");
        if (l.from >= nodes.size() || l.to >= nodes.size())
            throw ValidationError("lane references unknown node");
        if (l.from == l.to) throw ValidationError("lane must join two distinct nodes");
        if (l.centerline.size() < 2) throw ValidationError("lane centerline needs two points");
        if (!(l.width > 0.0) || !(l.speed_limit > 0.0))
            throw ValidationError("lane width and speed limit must be positive");
        if (!(l.length > 0.0) ||
            std::abs(l.length - polyline_length(l.centerline)) > 1e-6)
            throw ValidationError("lane length disagrees with its centerline");
        if (l.axis != 0 && l.axis != 1) throw ValidationError("lane axis must be 0 or 1");
    }
    if (!(timing.green > 0.0) || !(timing.yellow > 0.0) || !(timing.red > 0.0))
        throw ValidationError("signal timings must be positive");
    if (std::abs(timing.red - (timing.green + timing.yellow)) > 1e-9)
        throw ValidationError("red must span the opposing green plus yellow");

    // strong connectivity over the lane graph (transitions share a node)
    const auto reach = [&](bool forward) {
        std::vector<char> seen(lanes.size(), 0);
        std::deque<LaneId> q{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!q.empty()) {
            const LaneSegment& u = lane(q.front());
            q.pop_front();
            for (const LaneSegment& v : lanes) {
                const bool linked = forward ? (u.to == v.from) : (v.to == u.from);
                if (linked && !seen[v.id]) {
                    seen[v.id] = 1;
                    ++count;
                    q.push_back(v.id);
                }
            }
        }
        return count == lanes.size();
    };
    if (!reach(true) || !reach(false))
        throw ValidationError("lane graph is not strongly connected");
}

SignalPhase signal_phase(const MapGraph& map, NodeId n, int axis, double time) {
    const Intersection& node = map.node(n);
    if (!node.signalized) return SignalPhase::Green;
    if (axis != 0 && axis != 1) throw ValidationError("axis must be 0 or 1");
    const double cycle = map.timing.cycle();
    double t = std::fmod(time + node.cycle_offset, cycle);
    if (t < 0.0) t += cycle;
    // axis 0 runs first: green then yellow, then the axes swap
    if (axis == 1) {
        t -= map.timing.green + map.timing.yellow;
        if (t < 0.0) t += cycle;
    }
    if (t < map.timing.green) return SignalPhase::Green;
    if (t < map.timing.green + map.timing.yellow) return SignalPhase::Yellow;
    return SignalPhase::Red;
}

std::vector<TrafficLightState> lights_at(const MapGraph& map, double time) {
    std::vector<TrafficLightState> out;
    out.reserve(map.nodes.size());
    for (const Intersection& n : map.nodes) {
        if (!n.signalized) continue;
        out.push_back({n.id, signal_phase(map, n.id, 0, time), signal_phase(map, n.id, 1, time)});
    }
    return out;
}

namespace {

// right-hand traffic: lanes sit to the right of the road axis
Vec2 right_of(const Vec2& dir) { return {dir.y, -dir.x}; }

void add_road(MapGraph& g, NodeId a, NodeId b, int lanes_per_dir, double lane_width,
              double speed_limit, std::uint32_t road) {
    const Vec2 pa = g.nodes[a].position;
    const Vec2 pb = g.nodes[b].position;
    Vec2 d = pb - pa;
    const double len = d.norm();
    if (len <= 0.0) throw ValidationError("road endpoints coincide");
    d = d * (1.0 / len);
    const int axis = std::abs(d.x) >= std::abs(d.y) ? 0 : 1;
    for (int dir = 0; dir < 2; ++dir) {
        const NodeId from = dir == 0 ? a : b;
        const NodeId to = dir == 0 ? b : a;
        const Vec2 fwd = dir == 0 ? d : d * -1.0;
        for (int k = 0; k < lanes_per_dir; ++k) {
            LaneSegment l;
            l.id = static_cast<LaneId>(g.lanes.size());
            l.from = from;
            l.to = to;
            const Vec2 off = right_of(fwd) * (lane_width * (k + 0.5));
            l.centerline = {g.nodes[from].position + off, g.nodes[to].position + off};
            l.width = lane_width;
            l.speed_limit = speed_limit;
            l.axis = axis;
            l.lane_index = k;
            l.road = road;
            l.length = len;
            g.lanes.push_back(std::move(l));
        }
    }
}

}  // namespace

MapGraph build_grid_town(int rows, int cols, double block, int lanes_per_dir,
                         double lane_width, double speed_limit) {
    if (rows < 1 || cols < 1) throw ValidationError("grid needs at least one intersection");
    if (!(block > 0.0)) throw ValidationError("block length must be positive");
    if (lanes_per_dir < 1) throw ValidationError("need at least one lane per direction");
    if (!(lane_width > 0.0) || !(speed_limit > 0.0))
        throw ValidationError("lane width and speed limit must be positive");

    MapGraph g;
    const double half_cycle = g.timing.green + g.timing.yellow;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            Intersection n;
            n.id = static_cast<NodeId>(g.nodes.size());
            n.position = {c * block, r * block};
            n.signalized = true;
            n.cycle_offset = ((r + c) % 2) * half_cycle;
            g.nodes.push_back(n);
        }
    const auto nid = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };

    std::uint32_t road = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c)
            add_road(g, nid(r, c), nid(r, c + 1), lanes_per_dir, lane_width, speed_limit, road++);
    for (int r = 0; r + 1 < rows; ++r)
        for (int c = 0; c < cols; ++c)
            add_road(g, nid(r, c), nid(r + 1, c), lanes_per_dir, lane_width, speed_limit, road++);

    if (rows == 1 && cols == 1) {
        // lone intersection: add boundary stubs so traffic has somewhere to go
        const Vec2 center = g.nodes[0].position;
        const Vec2 dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (const Vec2& d : dirs) {
            Intersection stub;
            stub.id = static_cast<NodeId>(g.nodes.size());
            stub.position = center + d * block;
            stub.signalized = false;
            g.nodes.push_back(stub);
            add_road(g, 0, stub.id, lanes_per_dir, lane_width, speed_limit, road++);
        }
    }

    g.validate();
    return g;
}

// --- routing -----------------------------------------------------------

namespace {

void check_lane_point(const MapGraph& map, const LanePoint& p, const char* what) {
    const LaneSegment& l = map.lane(p.lane);
    if (!(p.s >= 0.0) || p.s > l.length + 1e-9)
        throw ValidationError(std::string(what) + " arclen outside its lane");
}

// Dijkstra over lanes. dist[v] = shortest lane-length travel from `from` to the
// start of lane v. Returns predecessor lanes for path reconstruction.
struct LaneSearch {
    std::vector<double> dist;
    std::vector<LaneId> pred;
};

LaneSearch lane_dijkstra(const MapGraph& map, const LanePoint& from) {
    const double inf = std::numeric_limits<double>::infinity();
    LaneSearch s;
    s.dist.assign(map.lanes.size(), inf);
    s.pred.assign(map.lanes.size(), kNoLane);
    using Item = std::pair<double, LaneId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    const LaneSegment& src = map.lane(from.lane);
    const double head = src.length - from.s;
    for (LaneId v : map.outgoing(src.to)) {
        if (head < s.dist[v]) {
            s.dist[v] = head;
            s.pred[v] = from.lane;
            q.push({head, v});
        }
    }
    while (!q.empty()) {
        const auto [d, u] = q.top();
        q.pop();
        if (d > s.dist[u]) continue;
        const LaneSegment& lu = map.lane(u);
        for (LaneId v : map.outgoing(lu.to)) {
            const double nd = d + lu.length;
            if (nd < s.dist[v]) {
                s.dist[v] = nd;
                s.pred[v] = u;
                q.push({nd, v});
            }
        }
    }
    return s;
}

}  // namespace

double network_distance(const MapGraph& map, const LanePoint& from, const LanePoint& to) {
    check_lane_point(map, from, "origin");
    check_lane_point(map, to, "destination");
    double best = std::numeric_limits<double>::infinity();
    if (from.lane == to.lane && to.s >= from.s) best = to.s - from.s;
    const LaneSearch s = lane_dijkstra(map, from);
    if (s.dist[to.lane] + to.s < best) best = s.dist[to.lane] + to.s;
    return best;
}

RoutePlan plan_route(const MapGraph& map, const LanePoint& from, const LanePoint& to) {
    check_lane_point(map, from, "origin");
    check_lane_point(map, to, "destination");

    std::vector<LaneId> chain;
    if (from.lane == to.lane && to.s >= from.s) {
        chain = {from.lane};
    } else {
        const LaneSearch s = lane_dijkstra(map, from);
        if (!std::isfinite(s.dist[to.lane]))
            throw ValidationError("destination unreachable from origin");
        // Walk predecessors starting one step in: a backward target on the
        // origin lane is reached by a cycle, so to.lane may equal from.lane.
        chain.push_back(to.lane);
        for (LaneId l = s.pred[to.lane]; l != from.lane; l = s.pred[l]) chain.push_back(l);
        chain.push_back(from.lane);
        std::reverse(chain.begin(), chain.end());
    }

    RoutePlan plan;
    plan.lanes = chain;
    const auto push_point = [&plan](const Vec2& p, LaneId owner) {
        if (!plan.polyline.empty() && (p - plan.polyline.back()).norm() < 1e-9) return;
        double s = 0.0;
        if (!plan.polyline.empty()) s = plan.arclen.back() + (p - plan.polyline.back()).norm();
        plan.polyline.push_back(p);
        plan.arclen.push_back(s);
        plan.point_lane.push_back(owner);
    };
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const LaneSegment& l = map.lane(chain[i]);
        const double s0 = i == 0 ? from.s : 0.0;
        const double s1 = i + 1 == chain.size() ? to.s : l.length;
        push_point(polyline_at(l.centerline, s0), l.id);
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < l.centerline.size(); ++k) {
            cum += (l.centerline[k + 1] - l.centerline[k]).norm();
            if (cum > s0 + 1e-9 && cum < s1 - 1e-9) push_point(l.centerline[k + 1], l.id);
        }
        push_point(polyline_at(l.centerline, s1), l.id);
    }
    if (plan.polyline.size() < 2) {  // degenerate zero-length route
        plan.polyline.push_back(plan.polyline.empty() ? polyline_at(map.lane(from.lane).centerline, from.s)
                                                      : plan.polyline.back());
        while (plan.arclen.size() < plan.polyline.size()) plan.arclen.push_back(0.0);
        while (plan.point_lane.size() < plan.polyline.size()) plan.point_lane.push_back(from.lane);
    }
    plan.destination = plan.polyline.back();
    plan.total_length = plan.arclen.back();
    return plan;
}

LaneId RoutePlan::lane_at_arclen(double s) const {
    if (polyline.empty()) return kNoLane;
    const auto it = std::lower_bound(arclen.begin(), arclen.end(), s);
    std::size_t i = it == arclen.end() ? arclen.size() - 1 : static_cast<std::size_t>(it - arclen.begin());
    return point_lane[i];
}

LanePoint nearest_lane_point(const MapGraph& map, const Vec2& p) {
    LanePoint best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const LaneSegment& l : map.lanes) {
        const PolylineHit hit = project_to_polyline(l.centerline, p);
        if (hit.distance < best_d) {
            best_d = hit.distance;
            best = {l.id, hit.arclen};
        }
    }
    if (!std::isfinite(best_d)) throw ValidationError("map has no lanes to project onto");
    return best;
}

// --- drivable-area raster ----------------------------------------------

bool DrivableMap::drivable(const Vec2& p) const {
    const int cx = static_cast<int>(std::floor((p.x - origin.x) / cell));
    const int cy = static_cast<int>(std::floor((p.y - origin.y) / cell));
    if (cx < 0 || cy < 0 || cx >= width || cy >= height) return false;
    return cells[static_cast<std::size_t>(cy) * width + cx] != 0;
}

DrivableMap build_drivable_map(const MapGraph& map, double cell) {
    if (!(cell > 0.0)) throw ValidationError("cell size must be positive");
    double max_half = map.node_half;
    Aabb box{map.nodes[0].position, map.nodes[0].position};
    for (const Intersection& n : map.nodes) box = box.expanded(n.position);
    for (const LaneSegment& l : map.lanes) {
        for (const Vec2& p : l.centerline) box = box.expanded(p);
        max_half = std::max(max_half, 0.5 * l.width);
    }
    const double margin = max_half + 2.0 * cell;
    DrivableMap dm;
    dm.cell = cell;
    dm.origin = {box.lo.x - margin, box.lo.y - margin};
    dm.width = static_cast<int>(std::ceil((box.hi.x - box.lo.x + 2.0 * margin) / cell));
    dm.height = static_cast<int>(std::ceil((box.hi.y - box.lo.y + 2.0 * margin) / cell));
    dm.cells.assign(static_cast<std::size_t>(dm.width) * dm.height, 0);

    const auto mark_disc_span = [&dm](const Vec2& a, const Vec2& b, double radius) {
        const double lo_x = std::min(a.x, b.x) - radius, hi_x = std::max(a.x, b.x) + radius;
        const double lo_y = std::min(a.y, b.y) - radius, hi_y = std::max(a.y, b.y) + radius;
        const int cx0 = std::max(0, static_cast<int>(std::floor((lo_x - dm.origin.x) / dm.cell)));
        const int cy0 = std::max(0, static_cast<int>(std::floor((lo_y - dm.origin.y) / dm.cell)));
        const int cx1 = std::min(dm.width - 1, static_cast<int>(std::floor((hi_x - dm.origin.x) / dm.cell)));
        const int cy1 = std::min(dm.height - 1, static_cast<int>(std::floor((hi_y - dm.origin.y) / dm.cell)));
        const Vec2 ab = b - a;
        const double len2 = ab.norm2();
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx) {
                const Vec2 p{dm.origin.x + (cx + 0.5) * dm.cell, dm.origin.y + (cy + 0.5) * dm.cell};
                double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                const Vec2 q = a + ab * t;
                if ((p - q).norm2() <= radius * radius)
                    dm.cells[static_cast<std::size_t>(cy) * dm.width + cx] = 1;
            }
    };

    for (const LaneSegment& l : map.lanes)
        for (std::size_t i = 0; i + 1 < l.centerline.size(); ++i)
            mark_disc_span(l.centerline[i], l.centerline[i + 1], 0.5 * l.width);
    for (const Intersection& n : map.nodes) {
        const Vec2 lo = n.position - Vec2{map.node_half, map.node_half};
        const Vec2 hi = n.position + Vec2{map.node_half, map.node_half};
        const int cx0 = std::max(0, static_cast<int>(std::floor((lo.x - dm.origin.x) / cell)));
        const int cy0 = std::max(0, static_cast<int>(std::floor((lo.y - dm.origin.y) / cell)));
        const int cx1 = std::min(dm.width - 1, static_cast<int>(std::floor((hi.x - dm.origin.x) / cell)));
        const int cy1 = std::min(dm.height - 1, static_cast<int>(std::floor((hi.y - dm.origin.y) / cell)));
        for (int cy = cy0; cy <= cy1; ++cy)
            for (int cx = cx0; cx <= cx1; ++cx)
                dm.cells[static_cast<std::size_t>(cy) * dm.width + cx] = 1;
    }
    return dm;
}

// --- serialization ------------------------------------------------------

nlohmann::json MapGraph::to_json() const {
    nlohmann::json j;
    j["timing"] = {{"green", timing.green}, {"yellow", timing.yellow}, {"red", timing.red}};
    j["node_half"] = node_half;
    j["nodes"] = nlohmann::json::array();
    for (const Intersection& n : nodes)
        j["nodes"].push_back({{"id", n.id},
                              {"x", n.position.x},
                              {"y", n.position.y},
                              {"signalized", n.signalized},
                              {"cycle_offset", n.cycle_offset}});
    j["lanes"] = nlohmann::json::array();
    for (const LaneSegment& l : lanes) {
        nlohmann::json pts = nlohmann::json::array();
        for (const Vec2& p : l.centerline) pts.push_back({p.x, p.y});
        j["lanes"].push_back({{"id", l.id},
                              {"from", l.from},
                              {"to", l.to},
                              {"centerline", std::move(pts)},
                              {"width", l.width},
                              {"speed_limit", l.speed_limit},
                              {"axis", l.axis},
                              {"lane_index", l.lane_index},
                              {"road", l.road}});
    }
    return j;
}

MapGraph MapGraph::from_json(const nlohmann::json& j) {
    MapGraph g;
    try {
        g.timing.green = j.at("timing").at("green").get<double>();
        g.timing.yellow = j.at("timing").at("yellow").get<double>();
        g.timing.red = j.at("timing").at("red").get<double>();
        g.node_half = j.value("node_half", 6.0);
        for (const auto& n : j.at("nodes")) {
            Intersection node;
            node.id = n.at("id").get<NodeId>();
            node.position = {n.at("x").get<double>(), n.at("y").get<double>()};
            node.signalized = n.value("signalized", true);
            node.cycle_offset = n.value("cycle_offset", 0.0);
            g.nodes.push_back(node);
        }
        for (const auto& lj : j.at("lanes")) {
            LaneSegment l;
            l.id = lj.at("id").get<LaneId>();
            l.from = lj.at("from").get<NodeId>();
            l.to = lj.at("to").get<NodeId>();
            for (const auto& p : lj.at("centerline"))
                l.centerline.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            l.width = lj.at("width").get<double>();
            l.speed_limit = lj.at("speed_limit").get<double>();
            l.axis = lj.at("axis").get<int>();
            l.lane_index = lj.value("lane_index", 0);
            l.road = lj.value("road", 0u);
            l.length = polyline_length(l.centerline);
            g.lanes.push_back(std::move(l));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed map json: ") + e.what());
    }
    g.validate();
    return g;
}

}  // namespace sff
