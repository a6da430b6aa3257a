#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sff/field.hpp"
#include "sff/predictor.hpp"
#include "sff/world.hpp"

namespace sff {

enum class PolicyKind { None, Autopilot, Rss, Sff };

PolicyKind policy_from_name(const std::string& name); // none|autopilot|rss|sff
std::string policy_name(PolicyKind kind);

struct PolicyGains {
    double k_v = 0.5;            // 1/s, cruise gain
    double k_rho = 2.0;          // accel per unit potential
    double lookahead_min = 5.0;  // m
    double lookahead_time = 1.0; // s
    double red_stop_zone = 15.0; // m before the stop line where v_target drops
    double gap_time = 2.0;       // s, following time gap
    double comfort_decel = 2.5;  // m/s^2, nominal approach braking
    double min_gap = 4.0;        // m, standstill bumper gap
    double leader_range = 60.0;  // m
};

struct RssParams {
    double ttc_long = 3.0;       // s
    double ttc_lat = 1.5;        // s
    double response_decel = 6.0; // m/s^2
    double steer_bias = 0.1;     // rad, drive-away nudge
};

enum class ClaimedSetSource { Oracle, Model };

struct PolicyContext {
    FieldParams fields;
    PolicyGains gains;
    RssParams rss;
    ControlLimits limits;
    ClaimedSetSource source = ClaimedSetSource::Oracle;
    const PredictorModel* model = nullptr;  // required for the model source
    const DrivableMap* drivable = nullptr;  // required for the model source
    double fallback_speed_limit = 14.0;
};

// The only mutable policy state: where along its route the ego has gotten to.
struct RouteProgress {
    RoutePlan plan;
    double arclen = 0.0;

    // Monotone projection of the position onto the route polyline.
    void advance(const Vec2& position);
    Vec2 lookahead_point(double dist) const;
    bool finished(double arrive_radius, const Vec2& position) const;
};

struct PairRho {
    ActorId other = kNoActor;
    double rho = 0.0;
};

struct Rationale {
    double total_rho = 0.0;
    std::vector<PairRho> pairs; // nonzero pairs only, actor order
    ActorId dominant = kNoActor;
    double v_target = 0.0;
    double cruise_term = 0.0;
    double potential_term = 0.0;
    std::string mode = "cruise";

    nlohmann::json to_json() const;
};

struct PolicyDecision {
    ControlInput control;
    Rationale rationale;
};

// Potential-based longitudinal control plus pure-pursuit steering. The
// potential sums claimed-set overlaps with every other actor, from analytic
// rollouts or the trained predictor. Red lights enter through v_target.
PolicyDecision sff_policy_step(const WorldState& world, ActorId ego, RouteProgress& route,
                               const PolicyContext& ctx);

// Leader-following cruise that only sees heading-aligned traffic ahead in its
// own corridor. Cross traffic inside an intersection is a deliberate blind
// spot.
PolicyDecision autopilot_step(const WorldState& world, ActorId ego, RouteProgress& route,
                              const PolicyContext& ctx);

// Time-to-collision gates on top of the autopilot nominal: brake when the
// longitudinal TTC is short, steer away when only the lateral TTC is short.
PolicyDecision rss_baseline_step(const WorldState& world, ActorId ego, RouteProgress& route,
                                 const PolicyContext& ctx);

// Route following that ignores every actor and every light.
PolicyDecision no_policy_step(const WorldState& world, ActorId ego, RouteProgress& route,
                              const PolicyContext& ctx);

PolicyDecision policy_step(PolicyKind kind, const WorldState& world, ActorId ego,
                           RouteProgress& route, const PolicyContext& ctx);

// --- shared controller pieces (also used by traffic behavior) --------------

double cruise_accel(double v, double v_target, const PolicyGains& g, const ControlLimits& lim);

// Speed admitted by a gap to a (possibly moving) obstacle ahead.
double gap_limited_speed(double gap, double lead_speed, const PolicyGains& g);

double pure_pursuit_steer(const ActorState& state, const VehicleShape& shape,
                          const RouteProgress& route, const PolicyGains& g,
                          const ControlLimits& lim);

struct LeaderInfo {
    ActorId id = kNoActor;
    double gap = 0.0;        // bumper-to-bumper along ego heading
    double speed_along = 0.0; // leader speed projected on ego heading
};

// Nearest actor ahead within the ego's forward corridor. aligned_only skips
// actors whose heading differs by more than 45 degrees (the autopilot blind
// spot); the careful variant sees anything in the corridor.
std::optional<LeaderInfo> find_leader(const WorldState& world, ActorId ego, double range,
                                      bool aligned_only);

// Distance along the route to the next stop line, with the signal axis info.
struct ApproachInfo {
    NodeId node = kNoNode;
    int axis = 0;
    double distance = 0.0; // m to the stop line, negative once past it
};
std::optional<ApproachInfo> next_signal_approach(const WorldState& world,
                                                 const RouteProgress& route);

// Red means stop; yellow means stop only if comfortably possible.
bool should_stop_for_signal(SignalPhase phase, double distance, double speed,
                            const PolicyGains& g);

}  // namespace sff
