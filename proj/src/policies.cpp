#include "sff/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sff/errors.hpp"
#include "sff/kernels.hpp"

namespace sff {

PolicyKind policy_from_name(const std::string& name) {
    if (name == "none") return PolicyKind::None;
    if (name == "autopilot") return PolicyKind::Autopilot;
    if (name == "rss") return PolicyKind::Rss;
    if (name == "sff") return PolicyKind::Sff;
    throw ValidationError("unknown policy '" + name + "' (none|autopilot|rss|sff)");
}

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::None: return "none";
        case PolicyKind::Autopilot: return "autopilot";
        case PolicyKind::Rss: return "rss";
        case PolicyKind::Sff: return "sff";
    }
    throw ValidationError("bad policy kind");
}

// --- route progress ---------------------------------------------------------

void RouteProgress::advance(const Vec2& position) {
    const auto& pts = plan.polyline;
    if (pts.size() < 2) return;
    // Project only near the current progress so a route that loops back close
    // to itself cannot snap the index backward or far ahead.
    const double lo = std::max(0.0, arclen - 5.0);
    const double hi = arclen + 40.0;
    auto it = std::upper_bound(plan.arclen.begin(), plan.arclen.end(), lo);
    std::size_t first = it == plan.arclen.begin() ? 0 : static_cast<std::size_t>(it - plan.arclen.begin()) - 1;
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = arclen;
    for (std::size_t i = first; i + 1 < pts.size() && plan.arclen[i] <= hi; ++i) {
        const Vec2 seg = pts[i + 1] - pts[i];
        const double len2 = seg.norm2();
        double t = 0.0;
        if (len2 > 0.0) t = std::clamp(dot(position - pts[i], seg) / len2, 0.0, 1.0);
        const Vec2 q = pts[i] + t * seg;
        const double d2 = (position - q).norm2();
        if (d2 < best_d2) {
            best_d2 = d2;
            best_s = plan.arclen[i] + t * std::sqrt(len2);
        }
    }
    arclen = std::max(arclen, best_s);
}

Vec2 RouteProgress::lookahead_point(double dist) const {
    return polyline_at(plan.polyline, arclen + dist);
}

bool RouteProgress::finished(double arrive_radius, const Vec2& position) const {
    return (position - plan.destination).norm() <= arrive_radius;
}

// --- shared controller pieces ------------------------------------------------

double cruise_accel(double v, double v_target, const PolicyGains& g, const ControlLimits& lim) {
    return std::clamp(g.k_v * (v_target - v), -lim.accel_abs_max, lim.accel_fwd_max);
}

double gap_limited_speed(double gap, double lead_speed, const PolicyGains& g) {
    const double lead = std::max(0.0, lead_speed);
    const double floor_gap = std::max(g.min_gap, g.gap_time * lead);
    const double headroom = gap - floor_gap;
    if (headroom >= 0.0) return lead + std::sqrt(2.0 * g.comfort_decel * headroom);
    return std::max(0.0, lead + 0.5 * headroom);
}

double pure_pursuit_steer(const ActorState& state, const VehicleShape& shape,
                          const RouteProgress& route, const PolicyGains& g,
                          const ControlLimits& lim) {
    const double la = std::max(g.lookahead_min, g.lookahead_time * state.speed);
    const Vec2 target = route.lookahead_point(la);
    const Vec2 d = target - state.position;
    if (d.norm() < 1e-9) return 0.0;
    const double alpha = normalize_angle(std::atan2(d.y, d.x) - state.heading);
    const double steer = std::atan2(2.0 * shape.wheelbase * std::sin(alpha), la);
    return std::clamp(steer, -lim.steer_max, lim.steer_max);
}

std::optional<LeaderInfo> find_leader(const WorldState& world, ActorId ego, double range,
                                      bool aligned_only) {
    const Actor& e = world.actor(ego);
    const Vec2 fwd{std::cos(e.state.heading), std::sin(e.state.heading)};
    const Vec2 left = fwd.perp();
    std::optional<LeaderInfo> best;
    for (const Actor& o : world.actors) {
        if (o.state.id == ego) continue;
        const Vec2 rel = o.state.position - e.state.position;
        const double x = dot(rel, fwd);
        if (x <= 0.0 || x > range) continue;
        const double lat_tol = 0.5 * (e.shape.width + o.shape.width) + 0.6;
        if (std::abs(dot(rel, left)) > lat_tol) continue;
        if (aligned_only &&
            std::abs(normalize_angle(o.state.heading - e.state.heading)) > 0.25 * std::numbers::pi)
            continue;
        const double gap = x - 0.5 * (e.shape.length + o.shape.length);
        if (!best || gap < best->gap) {
            const double along = o.state.speed * std::cos(o.state.heading - e.state.heading);
            best = LeaderInfo{o.state.id, gap, along};
        }
    }
    return best;
}

std::optional<ApproachInfo> next_signal_approach(const WorldState& world,
                                                 const RouteProgress& route) {
    const RoutePlan& plan = route.plan;
    if (!world.map || plan.polyline.size() < 2) return std::nullopt;
    const MapGraph& map = *world.map;
    const LaneId cur = plan.lane_at_arclen(route.arclen);
    if (cur == kNoLane) return std::nullopt;
    const LaneSegment& lane = map.lane(cur);
    const Intersection& node = map.node(lane.to);
    if (!node.signalized) return std::nullopt;
    // Arc length where the current lane hands over to the next one.
    auto it = std::lower_bound(plan.arclen.begin(), plan.arclen.end(), route.arclen);
    std::size_t i = it == plan.arclen.end() ? plan.arclen.size() - 1
                                            : static_cast<std::size_t>(it - plan.arclen.begin());
    while (i + 1 < plan.point_lane.size() && plan.point_lane[i + 1] == cur) ++i;
    while (i > 0 && plan.point_lane[i] != cur) --i;
    if (plan.point_lane[i] != cur) return std::nullopt;
    // The route crosses the junction only if it uses the lane to its very end.
    if ((plan.polyline[i] - lane.centerline.back()).norm() > 1e-6) return std::nullopt;
    const double stop_s = plan.arclen[i] - map.node_half;
    return ApproachInfo{node.id, lane.axis, stop_s - route.arclen};
}

bool should_stop_for_signal(SignalPhase phase, double distance, double speed,
                            const PolicyGains& g) {
    if (distance < -0.5) return false; // already committed to the junction
    if (phase == SignalPhase::Red) return true;
    if (phase == SignalPhase::Yellow)
        return distance > speed * speed / (2.0 * (g.comfort_decel + 0.5));
    return false;
}

// --- internals ---------------------------------------------------------------

namespace {

double route_speed_limit(const WorldState& world, const RouteProgress& route,
                         const PolicyContext& ctx) {
    if (!world.map || route.plan.polyline.size() < 2) return ctx.fallback_speed_limit;
    const LaneId cur = route.plan.lane_at_arclen(route.arclen);
    if (cur == kNoLane) return ctx.fallback_speed_limit;
    return world.map->lane(cur).speed_limit;
}

// Signal phase on the ego's own approach, with distance to its stop line.
struct SignalView {
    SignalPhase phase = SignalPhase::Green;
    double distance = std::numeric_limits<double>::infinity();
    bool present = false;
};

SignalView signal_view(const WorldState& world, const RouteProgress& route) {
    SignalView view;
    const auto approach = next_signal_approach(world, route);
    if (!approach || !world.map) return view;
    view.phase = signal_phase(*world.map, approach->node, approach->axis, world.time);
    view.distance = approach->distance;
    view.present = true;
    return view;
}

// Ego analytic set against a predicted set for the other actor. The window
// covers the braking envelope on the ego side and the full constant-speed
// horizon reach on the predicted side, so clipping never cuts support.
double model_pair_rho(const WorldState& world, ActorId ego, ActorId other,
                      const PolicyContext& ctx) {
    const FieldParams& fp = ctx.fields;
    const Actor& e = world.actor(ego);
    const Actor& o = world.actor(other);
    const double kr = fp.kernel.identity ? 0.0 : fp.kernel.radius;
    const double re = envelope_radius(e.state, e.shape, fp.proc) + kr;
    const double reach = o.state.speed * (fp.proc.horizon + fp.proc.dt) + o.shape.half_diagonal();
    const double ro = std::max(envelope_radius(o.state, o.shape, fp.proc), reach) + kr;
    if ((e.state.position - o.state.position).norm() >= re + ro) return 0.0;
    const Aabb lens{{std::max(e.state.position.x - re, o.state.position.x - ro),
                     std::max(e.state.position.y - re, o.state.position.y - ro)},
                    {std::min(e.state.position.x + re, o.state.position.x + ro),
                     std::min(e.state.position.y + re, o.state.position.y + ro)}};
    if (lens.lo.x >= lens.hi.x || lens.lo.y >= lens.hi.y) return 0.0;
    const GridSpec window = make_window(lens, kr + fp.cell, fp.cell);
    const ClaimedSetGrid occ_e = claimed_set_clipped(e.state, e.shape, fp.proc, window);
    const ClaimedSetGrid occ_o =
        predict_claimed_set(*ctx.model, world, other, window, *ctx.drivable, fp.proc);
    const kernels::Region be = occ_e.bounds();
    const kernels::Region bo = occ_o.bounds();
    if (be.empty() || bo.empty()) return 0.0;
    const SmoothField fe = mollify_clipped(occ_e, fp.kernel);
    const SmoothField fo = mollify_clipped(occ_o, fp.kernel);
    const kernels::Region de = be.dilated(fp.kernel.half).clipped(window.width, window.height);
    const kernels::Region dob = bo.dilated(fp.kernel.half).clipped(window.width, window.height);
    const kernels::Region both{std::max(de.x0, dob.x0), std::max(de.y0, dob.y0),
                               std::min(de.x1, dob.x1), std::min(de.y1, dob.y1)};
    if (both.empty()) return 0.0;
    return kernels::par::masked_dot(window.width, fe.values.data(), fo.values.data(), both,
                                    window.cell_area());
}

void accumulate_potential(const WorldState& world, ActorId ego, const PolicyContext& ctx,
                          Rationale& why) {
    if (ctx.source == ClaimedSetSource::Model && (!ctx.model || !ctx.drivable))
        throw ValidationError("model claimed-set source needs a model and a drivable map");
    double best = 0.0;
    for (const Actor& o : world.actors) {
        if (o.state.id == ego) continue;
        const double rho = ctx.source == ClaimedSetSource::Oracle
                               ? pair_potential(world, ego, o.state.id, ctx.fields)
                               : model_pair_rho(world, ego, o.state.id, ctx);
        if (rho <= 0.0) continue;
        why.pairs.push_back({o.state.id, rho});
        why.total_rho += rho;
        if (rho > best) {
            best = rho;
            why.dominant = o.state.id;
        }
    }
}

PolicyDecision follow_decision(const WorldState& world, ActorId ego, RouteProgress& route,
                               const PolicyContext& ctx, bool obey_signals, bool see_leader) {
    const Actor& e = world.actor(ego);
    route.advance(e.state.position);
    PolicyDecision d;
    d.rationale.v_target = route_speed_limit(world, route, ctx);
    double v_allow = d.rationale.v_target;
    if (see_leader) {
        const auto leader = find_leader(world, ego, ctx.gains.leader_range, true);
        if (leader) {
            const double by_gap = gap_limited_speed(leader->gap, leader->speed_along, ctx.gains);
            if (by_gap < v_allow) {
                v_allow = by_gap;
                d.rationale.mode = "follow";
                d.rationale.dominant = leader->id;
            }
        }
    }
    if (obey_signals) {
        const SignalView sig = signal_view(world, route);
        if (sig.present &&
            should_stop_for_signal(sig.phase, sig.distance, e.state.speed, ctx.gains)) {
            const double line_gap = sig.distance - 0.5 * e.shape.length;
            const double by_signal = gap_limited_speed(line_gap, 0.0, ctx.gains);
            if (by_signal < v_allow) {
                v_allow = by_signal;
                d.rationale.mode = "signal";
            }
        }
    }
    d.rationale.cruise_term = cruise_accel(e.state.speed, v_allow, ctx.gains, ctx.limits);
    d.control.accel = d.rationale.cruise_term;
    d.control.steer = pure_pursuit_steer(e.state, e.shape, route, ctx.gains, ctx.limits);
    return d;
}

}  // namespace

// --- policies ----------------------------------------------------------------

PolicyDecision sff_policy_step(const WorldState& world, ActorId ego, RouteProgress& route,
                               const PolicyContext& ctx) {
    const Actor& e = world.actor(ego);
    route.advance(e.state.position);
    PolicyDecision d;
    d.rationale.v_target = route_speed_limit(world, route, ctx);
    const SignalView sig = signal_view(world, route);
    if (sig.present && sig.phase == SignalPhase::Red && sig.distance >= 0.0 &&
        sig.distance <= ctx.gains.red_stop_zone) {
        d.rationale.v_target = 0.0;
        d.rationale.mode = "red";
    }
    accumulate_potential(world, ego, ctx, d.rationale);
    d.rationale.cruise_term = ctx.gains.k_v * (d.rationale.v_target - e.state.speed);
    d.rationale.potential_term = ctx.gains.k_rho * d.rationale.total_rho;
    if (d.rationale.total_rho > 0.0 && d.rationale.mode == "cruise") d.rationale.mode = "avoid";
    d.control.accel = std::clamp(d.rationale.cruise_term - d.rationale.potential_term,
                                 -ctx.limits.accel_abs_max, ctx.limits.accel_fwd_max);
    d.control.steer = pure_pursuit_steer(e.state, e.shape, route, ctx.gains, ctx.limits);
    return d;
}

PolicyDecision autopilot_step(const WorldState& world, ActorId ego, RouteProgress& route,
                              const PolicyContext& ctx) {
    return follow_decision(world, ego, route, ctx, true, true);
}

PolicyDecision rss_baseline_step(const WorldState& world, ActorId ego, RouteProgress& route,
                                 const PolicyContext& ctx) {
    PolicyDecision d = follow_decision(world, ego, route, ctx, true, true);
    const Actor& e = world.actor(ego);
    const Vec2 fwd{std::cos(e.state.heading), std::sin(e.state.heading)};
    const Vec2 left = fwd.perp();
    const Vec2 ego_vel = e.state.speed * fwd;

    // Longitudinal: time to close the bumper gap on anything in the forward
    // corridor, whatever its heading.
    double ttc_long = std::numeric_limits<double>::infinity();
    ActorId threat = kNoActor;
    for (const Actor& o : world.actors) {
        if (o.state.id == ego) continue;
        const Vec2 rel = o.state.position - e.state.position;
        const double x = dot(rel, fwd);
        if (x <= 0.0 || x > ctx.gains.leader_range) continue;
        const double lat_tol = 0.5 * (e.shape.width + o.shape.width) + 0.6;
        if (std::abs(dot(rel, left)) > lat_tol) continue;
        const double closing =
            e.state.speed - o.state.speed * std::cos(o.state.heading - e.state.heading);
        if (closing <= 0.0) continue;
        const double gap = std::max(0.0, x - 0.5 * (e.shape.length + o.shape.length));
        const double ttc = gap / closing;
        if (ttc < ttc_long) {
            ttc_long = ttc;
            threat = o.state.id;
        }
    }
    if (ttc_long < ctx.rss.ttc_long) {
        d.control.accel = -ctx.rss.response_decel;
        d.rationale.mode = "brake_ttc";
        d.rationale.dominant = threat;
        return d;
    }

    // Lateral: anything beside the corridor converging on the ego laterally.
    double ttc_lat = std::numeric_limits<double>::infinity();
    double threat_side = 0.0;
    for (const Actor& o : world.actors) {
        if (o.state.id == ego) continue;
        const Vec2 rel = o.state.position - e.state.position;
        const double x = dot(rel, fwd);
        const double y = dot(rel, left);
        const double lat_tol = 0.5 * (e.shape.width + o.shape.width) + 0.6;
        if (x < -5.0 || x > 40.0 || std::abs(y) <= lat_tol || std::abs(y) > 20.0) continue;
        const Vec2 o_vel = o.state.speed * Vec2{std::cos(o.state.heading), std::sin(o.state.heading)};
        const double vy = dot(o_vel - ego_vel, left);
        if (y * vy >= 0.0) continue; // not converging
        const double ttc = (std::abs(y) - lat_tol) / std::abs(vy);
        if (ttc < ttc_lat) {
            ttc_lat = ttc;
            threat_side = y;
            threat = o.state.id;
        }
    }
    if (ttc_lat < ctx.rss.ttc_lat) {
        const double bias = threat_side > 0.0 ? -ctx.rss.steer_bias : ctx.rss.steer_bias;
        d.control.steer = std::clamp(d.control.steer + bias, -ctx.limits.steer_max,
                                     ctx.limits.steer_max);
        d.rationale.mode = "steer_away";
        d.rationale.dominant = threat;
    }
    return d;
}

PolicyDecision no_policy_step(const WorldState& world, ActorId ego, RouteProgress& route,
                              const PolicyContext& ctx) {
    return follow_decision(world, ego, route, ctx, false, false);
}

PolicyDecision policy_step(PolicyKind kind, const WorldState& world, ActorId ego,
                           RouteProgress& route, const PolicyContext& ctx) {
    switch (kind) {
        case PolicyKind::None: return no_policy_step(world, ego, route, ctx);
        case PolicyKind::Autopilot: return autopilot_step(world, ego, route, ctx);
        case PolicyKind::Rss: return rss_baseline_step(world, ego, route, ctx);
        case PolicyKind::Sff: return sff_policy_step(world, ego, route, ctx);
    }
    throw ValidationError("bad policy kind");
}

nlohmann::json Rationale::to_json() const {
    nlohmann::json pj = nlohmann::json::array();
    for (const PairRho& p : pairs) pj.push_back({{"other", p.other}, {"rho", p.rho}});
    nlohmann::json j{{"total_rho", total_rho},  {"pairs", std::move(pj)},
                     {"v_target", v_target},    {"cruise_term", cruise_term},
                     {"potential_term", potential_term}, {"mode", mode}};
    if (dominant != kNoActor) j["dominant"] = dominant;
    return j;
}

}  // namespace sff
