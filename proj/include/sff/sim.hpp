#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sff/policies.hpp"
#include "sff/rng.hpp"
#include "sff/world.hpp"

namespace sff {

// How much traffic misbehaves: probability of ignoring nearby vehicles on a
// given step, and of running a red light on a given approach.
struct AggressionParams {
    double ignore_surroundings = 0.0;
    double ignore_signal = 0.0;
};

enum class AggressionLevel { No, Low, Intermediate, High };

AggressionParams aggression_params(AggressionLevel level);
AggressionLevel aggression_from_name(const std::string& name); // no|low|intermediate|high
std::string aggression_name(AggressionLevel level);

struct ShapeSpec {
    std::string name;
    VehicleShape shape;
};
const std::vector<ShapeSpec>& shape_catalog(); // sedan, suv, van, truck

struct ScenarioConfig {
    int rows = 3, cols = 3;          // grid town size
    double block = 100.0;            // m
    int lanes_per_dir = 1;
    double lane_width = 3.5;         // m
    double speed_limit = 14.0;       // m/s
    int npc_count = 20;
    int steps = 2000;
    double dt = 0.1;                 // s
    std::uint64_t seed = 1;
    PolicyKind policy = PolicyKind::Sff;
    AggressionLevel aggression = AggressionLevel::Intermediate;
    ClaimedSetSource source = ClaimedSetSource::Oracle;
    std::string model_path;          // checkpoint, required for the model source
    double arrive_radius = 4.0;      // m
    double min_destination = 100.0;  // m of network distance
    std::string log_path;            // JSONL decision log; empty disables it
    PolicyGains gains;
    RssParams rss;
    ControlLimits limits;
    FieldParams fields = FieldParams::defaults();

    void validate() const;
};

struct EpisodeResult {
    int arrivals = 0;
    int episode_steps = 0;
    int accident_free_steps = 0;
    bool terminated_by_collision = false;
    int npc_collisions = 0; // frozen NPC pairs
    int red_runs = 0;       // latched run-the-light decisions
    double sim_time = 0.0;  // s simulated
    std::string decision_log_path;

    nlohmann::json to_json() const;
};

// One per-approach signal decision, drawn exactly once per approached node.
// The draw always happens, even at p = 0, so runs with different aggression
// levels consume identical uniforms and stay coupled.
bool latch_red_run(Rng& rng, double p_ignore_signal, NodeId node, NodeId& latched_node,
                   bool& run_red);

// A running scenario: world, per-actor driver state, and the policy context.
// Actor 0 is the ego; with ego_driven = false it behaves like regular traffic
// (used for dataset generation).
class Simulation {
  public:
    explicit Simulation(const ScenarioConfig& cfg);

    void step();

    const ScenarioConfig& config() const { return cfg_; }
    WorldState& world() { return world_; }
    const WorldState& world() const { return world_; }
    const DrivableMap& drivable() const { return drivable_; }
    int step_index() const { return step_index_; }
    bool ego_collided() const { return ego_collided_; }
    int ego_arrivals() const { return ego_arrivals_; }
    int npc_collisions() const { return npc_collisions_; }
    int red_runs() const { return red_runs_; }
    const PolicyDecision& last_ego_decision() const { return last_decision_; }
    const RouteProgress& route_of(ActorId id) const;

    bool ego_driven = true;

  private:
    struct Driver {
        RouteProgress route;
        LanePoint destination;
        Rng rng{0};
        NodeId latched_node = kNoNode;
        bool run_red = false;
    };

    void spawn_actor(ActorId id, const VehicleShape& shape, Rng& spawn_rng);
    void assign_destination(std::size_t idx, const LanePoint& from);
    ControlInput npc_control(std::size_t idx);
    void handle_arrivals();
    void handle_collisions();

    ScenarioConfig cfg_;
    std::shared_ptr<const MapGraph> map_;
    DrivableMap drivable_;
    WorldState world_;
    std::vector<Driver> drivers_;
    std::shared_ptr<PredictorModel> model_;
    PolicyContext ctx_;
    AggressionParams aggro_;
    PolicyDecision last_decision_;
    int step_index_ = 0;
    int ego_arrivals_ = 0;
    int npc_collisions_ = 0;
    int red_runs_ = 0;
    bool ego_collided_ = false;
};

// Runs a full episode, optionally writing one JSONL decision record per step.
EpisodeResult run_episode(const ScenarioConfig& cfg);

// Two unrelated vehicles in open space (no map): random catalog shapes,
// positions within a span x span box, any headings, speeds up to max_speed.
// Used for potential, force and non-increase checks.
WorldState random_pair_world(Rng& rng, double span = 30.0, double max_speed = 15.0);

}  // namespace sff
