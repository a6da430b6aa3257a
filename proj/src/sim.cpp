#include "sff/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "sff/errors.hpp"

namespace sff {

AggressionParams aggression_params(AggressionLevel level) {
    switch (level) {
        case AggressionLevel::No: return {0.0, 0.0};
        case AggressionLevel::Low: return {0.10, 0.05};
        case AggressionLevel::Intermediate: return {0.25, 0.15};
        case AggressionLevel::High: return {0.50, 0.30};
    }
    throw ValidationError("bad aggression level");
}

AggressionLevel aggression_from_name(const std::string& name) {
    if (name == "no") return AggressionLevel::No;
    if (name == "low") return AggressionLevel::Low;
    if (name == "intermediate") return AggressionLevel::Intermediate;
    if (name == "high") return AggressionLevel::High;
    throw ValidationError("unknown aggression level '" + name + "' (no|low|intermediate|high)");
}

std::string aggression_name(AggressionLevel level) {
    switch (level) {
        case AggressionLevel::No: return "no";
        case AggressionLevel::Low: return "low";
        case AggressionLevel::Intermediate: return "intermediate";
        case AggressionLevel::High: return "high";
    }
    throw ValidationError("bad aggression level");
}

const std::vector<ShapeSpec>& shape_catalog() {
    static const std::vector<ShapeSpec> catalog{
        {"sedan", {4.5, 1.9, 2.7}},
        {"suv", {4.8, 2.0, 2.9}},
        {"van", {5.2, 2.1, 3.2}},
        {"truck", {7.0, 2.4, 4.0}},
    };
    return catalog;
}

void ScenarioConfig::validate() const {
    if (rows < 1 || cols < 1) throw ValidationError("grid needs at least one intersection");
    if (!(block > 0.0)) throw ValidationError("block length must be positive");
    if (lanes_per_dir < 1) throw ValidationError("need at least one lane per direction");
    if (npc_count < 0) throw ValidationError("npc count cannot be negative");
    if (steps < 1) throw ValidationError("episode needs at least one step");
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    if (!(arrive_radius > 0.0)) throw ValidationError("arrival radius must be positive");
    if (min_destination < 0.0) throw ValidationError("destination distance cannot be negative");
    if (source == ClaimedSetSource::Model && model_path.empty())
        throw ValidationError("model claimed-set source needs a model path");
    fields.validate();
}

nlohmann::json EpisodeResult::to_json() const {
    return {{"arrivals", arrivals},
            {"episode_steps", episode_steps},
            {"accident_free_steps", accident_free_steps},
            {"terminated_by_collision", terminated_by_collision},
            {"npc_collisions", npc_collisions},
            {"red_runs", red_runs},
            {"sim_time", sim_time},
            {"decision_log", decision_log_path}};
}

bool latch_red_run(Rng& rng, double p_ignore_signal, NodeId node, NodeId& latched_node,
                   bool& run_red) {
    if (latched_node == node) return false;
    run_red = rng.bernoulli(p_ignore_signal);
    latched_node = node;
    return true;
}

// --- simulation ---------------------------------------------------------------

namespace {

constexpr double kSignalZone = 30.0;   // m before the stop line where NPCs commit
constexpr double kLaneChangeProb = 0.002;
constexpr double kLaneGapCheck = 10.0; // m clearance required on the target lane

}  // namespace

Simulation::Simulation(const ScenarioConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    map_ = std::make_shared<const MapGraph>(build_grid_town(
        cfg_.rows, cfg_.cols, cfg_.block, cfg_.lanes_per_dir, cfg_.lane_width, cfg_.speed_limit));
    drivable_ = build_drivable_map(*map_, 1.0);
    world_.map = map_;
    world_.time = 0.0;
    world_.refresh_lights();
    if (cfg_.source == ClaimedSetSource::Model)
        model_ = std::make_shared<PredictorModel>(PredictorModel::load(cfg_.model_path));
    ctx_.fields = cfg_.fields;
    ctx_.gains = cfg_.gains;
    ctx_.rss = cfg_.rss;
    ctx_.limits = cfg_.limits;
    ctx_.source = cfg_.source;
    ctx_.model = model_.get();
    ctx_.drivable = &drivable_;
    ctx_.fallback_speed_limit = cfg_.speed_limit;
    aggro_ = aggression_params(cfg_.aggression);

    const Rng root(cfg_.seed);
    Rng spawn_rng = root.derive("spawn");
    spawn_actor(0, shape_catalog()[0].shape, spawn_rng);
    for (int k = 0; k < cfg_.npc_count; ++k) {
        const ShapeSpec& pick = shape_catalog()[spawn_rng.uniform_index(shape_catalog().size())];
        spawn_actor(static_cast<ActorId>(k + 1), pick.shape, spawn_rng);
    }
}

void Simulation::spawn_actor(ActorId id, const VehicleShape& shape, Rng& spawn_rng) {
    const Rng root(cfg_.seed);
    for (int attempt = 0; attempt < 200; ++attempt) {
        const LaneId lane_id = static_cast<LaneId>(spawn_rng.uniform_index(map_->lanes.size()));
        const LaneSegment& lane = map_->lane(lane_id);
        const double margin = 0.5 * shape.length + 1.0;
        if (lane.length <= 2.0 * margin) continue;
        const double s = spawn_rng.uniform(margin, lane.length - margin);
        ActorState state;
        state.id = id;
        state.position = polyline_at(lane.centerline, s);
        state.heading = lane.heading_at(s);
        state.speed = spawn_rng.uniform(0.0, 0.6 * lane.speed_limit);
        bool clear = true;
        for (const Actor& other : world_.actors) {
            const double need =
                shape.half_diagonal() + other.shape.half_diagonal() + 1.0;
            if ((other.state.position - state.position).norm() < need) {
                clear = false;
                break;
            }
        }
        if (!clear) continue;
        world_.actors.push_back({state, shape, false});
        Driver d;
        d.rng = root.derive("driver", id);
        drivers_.push_back(std::move(d));
        assign_destination(drivers_.size() - 1, {lane_id, s});
        return;
    }
    throw SpawnError("no room to spawn a " + std::to_string(shape.length) +
                     " m long vehicle after 200 attempts");
}

void Simulation::assign_destination(std::size_t idx, const LanePoint& from) {
    Driver& d = drivers_[idx];
    for (int attempt = 0; attempt < 200; ++attempt) {
        const LaneId lane_id = static_cast<LaneId>(d.rng.uniform_index(map_->lanes.size()));
        const LaneSegment& lane = map_->lane(lane_id);
        if (lane.length <= 2.0) continue;
        const double s = d.rng.uniform(1.0, lane.length - 1.0);
        const LanePoint dest{lane_id, s};
        const double dist = network_distance(*map_, from, dest);
        if (!std::isfinite(dist) || dist < cfg_.min_destination) continue;
        d.destination = dest;
        d.route.plan = plan_route(*map_, from, dest);
        d.route.arclen = 0.0;
        return;
    }
    throw ValidationError("no reachable destination at least " +
                          std::to_string(cfg_.min_destination) + " m away");
}

const RouteProgress& Simulation::route_of(ActorId id) const {
    for (std::size_t i = 0; i < world_.actors.size(); ++i)
        if (world_.actors[i].state.id == id) return drivers_[i].route;
    throw LookupError("no route for actor " + std::to_string(id));
}

ControlInput Simulation::npc_control(std::size_t idx) {
    Actor& actor = world_.actors[idx];
    Driver& d = drivers_[idx];
    d.route.advance(actor.state.position);

    // Fixed draw order per step keeps actor streams aligned across aggression
    // levels: lane-change attempt, then the surroundings draw, then at most
    // one signal latch.
    if (d.rng.bernoulli(kLaneChangeProb)) {
        const LaneId cur = d.route.plan.lane_at_arclen(d.route.arclen);
        const std::optional<LaneId> adj =
            cur == kNoLane ? std::optional<LaneId>{} : map_->adjacent_lane(cur);
        if (adj) {
            const LaneSegment& target = map_->lane(*adj);
            const PolylineHit hit = project_to_polyline(target.centerline, actor.state.position);
            bool clear = d.rng.bernoulli(aggro_.ignore_surroundings);
            if (!clear) {
                clear = true;
                for (const Actor& other : world_.actors) {
                    if (other.state.id == actor.state.id) continue;
                    if ((other.state.position - hit.point).norm() < kLaneGapCheck) {
                        clear = false;
                        break;
                    }
                }
            }
            if (clear && target.length > 2.0) {
                const double s = std::clamp(hit.arclen, 1.0, target.length - 1.0);
                d.route.plan = plan_route(*map_, {*adj, s}, d.destination);
                d.route.arclen = 0.0;
            }
        }
    }

    const bool ignore_traffic = d.rng.bernoulli(aggro_.ignore_surroundings);

    double v_allow = cfg_.speed_limit;
    const LaneId cur = d.route.plan.lane_at_arclen(d.route.arclen);
    if (cur != kNoLane) v_allow = map_->lane(cur).speed_limit;

    if (!ignore_traffic) {
        const auto leader = find_leader(world_, actor.state.id, cfg_.gains.leader_range, false);
        if (leader)
            v_allow = std::min(v_allow, gap_limited_speed(leader->gap, leader->speed_along,
                                                          cfg_.gains));
    }

    const auto approach = next_signal_approach(world_, d.route);
    if (!approach || approach->distance < -0.5) {
        d.latched_node = kNoNode;
    } else if (approach->distance <= kSignalZone) {
        if (latch_red_run(d.rng, aggro_.ignore_signal, approach->node, d.latched_node,
                          d.run_red) &&
            d.run_red)
            ++red_runs_;
        if (!d.run_red) {
            const SignalPhase phase =
                signal_phase(*map_, approach->node, approach->axis, world_.time);
            if (should_stop_for_signal(phase, approach->distance, actor.state.speed,
                                       cfg_.gains)) {
                const double line_gap = approach->distance - 0.5 * actor.shape.length;
                v_allow = std::min(v_allow, gap_limited_speed(line_gap, 0.0, cfg_.gains));
            }
        }
    }

    ControlInput u;
    u.accel = cruise_accel(actor.state.speed, v_allow, cfg_.gains, cfg_.limits);
    u.steer = pure_pursuit_steer(actor.state, actor.shape, d.route, cfg_.gains, cfg_.limits);
    return u;
}

void Simulation::step() {
    const std::size_t n = world_.actors.size();
    std::vector<ControlInput> controls(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (world_.actors[i].frozen) continue;
        if (i == 0 && ego_driven) {
            last_decision_ = policy_step(cfg_.policy, world_, world_.actors[0].state.id,
                                         drivers_[0].route, ctx_);
            controls[0] = last_decision_.control;
        } else {
            controls[i] = npc_control(i);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (world_.actors[i].frozen) continue;
        Actor& actor = world_.actors[i];
        const ControlInput u = clamp_control(controls[i], cfg_.limits);
        actor.state = step_kinematics(actor.state, u, actor.shape, cfg_.dt);
    }
    world_.time += cfg_.dt;
    world_.refresh_lights();
    handle_arrivals();
    handle_collisions();
    ++step_index_;
}

void Simulation::handle_arrivals() {
    for (std::size_t i = 0; i < world_.actors.size(); ++i) {
        Actor& actor = world_.actors[i];
        if (actor.frozen) continue;
        if (!drivers_[i].route.finished(cfg_.arrive_radius, actor.state.position)) continue;
        if (i == 0) ++ego_arrivals_;
        assign_destination(i, nearest_lane_point(*map_, actor.state.position));
    }
}

void Simulation::handle_collisions() {
    const std::size_t n = world_.actors.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Actor& a = world_.actors[i];
            Actor& b = world_.actors[j];
            if (a.frozen && b.frozen) continue;
            const double reach = a.shape.half_diagonal() + b.shape.half_diagonal();
            if ((a.state.position - b.state.position).norm() >= reach) continue;
            if (!polygons_overlap(footprint_polygon(a.state, a.shape),
                                  footprint_polygon(b.state, b.shape)))
                continue;
            if (i == 0) {
                ego_collided_ = true;
            } else {
                if (!a.frozen) {
                    a.frozen = true;
                    a.state.speed = 0.0;
                }
                if (!b.frozen) {
                    b.frozen = true;
                    b.state.speed = 0.0;
                }
                ++npc_collisions_;
            }
        }
    }
}

WorldState random_pair_world(Rng& rng, double span, double max_speed) {
    WorldState world;
    world.time = 0.0;
    for (ActorId id = 0; id < 2; ++id) {
        const ShapeSpec& pick = shape_catalog()[rng.uniform_index(shape_catalog().size())];
        ActorState s;
        s.id = id;
        s.position = {rng.uniform(-0.5 * span, 0.5 * span), rng.uniform(-0.5 * span, 0.5 * span)};
        s.heading = normalize_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
        s.speed = rng.uniform(0.0, max_speed);
        world.actors.push_back({s, pick.shape, false});
    }
    return world;
}

EpisodeResult run_episode(const ScenarioConfig& cfg) {
    Simulation sim(cfg);
    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path);
        if (!log) throw IoError("cannot open decision log '" + cfg.log_path + "'");
    }
    EpisodeResult result;
    result.decision_log_path = cfg.log_path;
    for (int k = 0; k < cfg.steps; ++k) {
        sim.step();
        if (log) {
            const Actor& ego = sim.world().actors[0];
            const PolicyDecision& d = sim.last_ego_decision();
            nlohmann::json line{{"step", k},
                                {"t", sim.world().time},
                                {"x", ego.state.position.x},
                                {"y", ego.state.position.y},
                                {"heading", ego.state.heading},
                                {"speed", ego.state.speed},
                                {"accel", d.control.accel},
                                {"steer", d.control.steer},
                                {"rationale", d.rationale.to_json()}};
            log << line.dump() << '\n';
        }
        if (sim.ego_collided()) {
            result.accident_free_steps = k;
            result.episode_steps = k + 1;
            result.terminated_by_collision = true;
            break;
        }
        result.accident_free_steps = k + 1;
        result.episode_steps = k + 1;
    }
    result.arrivals = sim.ego_arrivals();
    result.npc_collisions = sim.npc_collisions();
    result.red_runs = sim.red_runs();
    result.sim_time = sim.world().time;
    if (log) {
        log.flush();
        if (!log) throw IoError("failed writing decision log '" + cfg.log_path + "'");
    }
    return result;
}

}  // namespace sff
