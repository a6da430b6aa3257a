#pragma once

#include <memory>
#include <vector>

#include <json.hpp>

#include "sff/map.hpp"
#include "sff/vehicle.hpp"

namespace sff {

struct Actor {
    ActorState state;
    VehicleShape shape;
    bool frozen = false;  // wrecked traffic stays in place as an obstacle
};

// Immutable snapshot passed between steps. The map is shared, never mutated.
struct WorldState {
    double time = 0.0;
    std::vector<Actor> actors;
    std::vector<TrafficLightState> lights;
    std::shared_ptr<const MapGraph> map;

    const Actor& actor(ActorId id) const;
    Actor& actor(ActorId id);
    const Actor* find_actor(ActorId id) const;
    bool has_actor(ActorId id) const { return find_actor(id) != nullptr; }

    void refresh_lights();
    void validate() const;

    // Self-contained snapshot (embeds the map) for the renderer and debugging.
    nlohmann::json to_json() const;
    static WorldState from_json(const nlohmann::json& j);
};

}  // namespace sff
