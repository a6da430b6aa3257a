#include "sff/world.hpp"

#include <cmath>
#include <unordered_set>

#include "sff/errors.hpp"

namespace sff {

const Actor* WorldState::find_actor(ActorId id) const {
    for (const Actor& a : actors)
        if (a.state.id == id) return &a;
    return nullptr;
}

const Actor& WorldState::actor(ActorId id) const {
    if (const Actor* a = find_actor(id)) return *a;
    throw LookupError("unknown actor id " + std::to_string(id));
}

Actor& WorldState::actor(ActorId id) {
    return const_cast<Actor&>(static_cast<const WorldState*>(this)->actor(id));
}

void WorldState::refresh_lights() {
    if (!map) throw ValidationError("world has no map");
    lights = lights_at(*map, time);
}

void WorldState::validate() const {
    if (!map) throw ValidationError("world has no map");
    if (!std::isfinite(time)) throw ValidationError("world time must be finite");
    std::unordered_set<ActorId> ids;
    for (const Actor& a : actors) {
        a.state.validate();
        a.shape.validate();
        if (!ids.insert(a.state.id).second)
            throw ValidationError("duplicate actor id " + std::to_string(a.state.id));
    }
}

nlohmann::json WorldState::to_json() const {
    nlohmann::json j;
    j["time"] = time;
    j["actors"] = nlohmann::json::array();
    for (const Actor& a : actors)
        j["actors"].push_back({{"id", a.state.id},
                               {"x", a.state.position.x},
                               {"y", a.state.position.y},
                               {"heading", a.state.heading},
                               {"speed", a.state.speed},
                               {"length", a.shape.length},
                               {"width", a.shape.width},
                               {"wheelbase", a.shape.wheelbase},
                               {"frozen", a.frozen}});
    j["lights"] = nlohmann::json::array();
    const auto phase_name = [](SignalPhase p) {
        switch (p) {
            case SignalPhase::Green: return "green";
            case SignalPhase::Yellow: return "yellow";
            default: return "red";
        }
    };
    for (const TrafficLightState& l : lights)
        j["lights"].push_back(
            {{"intersection", l.intersection}, {"ew", phase_name(l.ew)}, {"ns", phase_name(l.ns)}});
    if (map) j["map"] = map->to_json();
    return j;
}

WorldState WorldState::from_json(const nlohmann::json& j) {
    WorldState w;
    const auto phase_of = [](const std::string& s) {
        if (s == "green") return SignalPhase::Green;
        if (s == "yellow") return SignalPhase::Yellow;
        if (s == "red") return SignalPhase::Red;
        throw ValidationError("unknown signal phase '" + s + "'");
    };
    try {
        w.time = j.at("time").get<double>();
        if (j.contains("map")) w.map = std::make_shared<MapGraph>(MapGraph::from_json(j.at("map")));
        for (const auto& aj : j.at("actors")) {
            Actor a;
            a.state.id = aj.at("id").get<ActorId>();
            a.state.position = {aj.at("x").get<double>(), aj.at("y").get<double>()};
            a.state.heading = aj.at("heading").get<double>();
            a.state.speed = aj.at("speed").get<double>();
            a.shape.length = aj.at("length").get<double>();
            a.shape.width = aj.at("width").get<double>();
            a.shape.wheelbase = aj.at("wheelbase").get<double>();
            a.frozen = aj.value("frozen", false);
            w.actors.push_back(a);
        }
        for (const auto& lj : j.value("lights", nlohmann::json::array())) {
            TrafficLightState l;
            l.intersection = lj.at("intersection").get<NodeId>();
            l.ew = phase_of(lj.at("ew").get<std::string>());
            l.ns = phase_of(lj.at("ns").get<std::string>());
            w.lights.push_back(l);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed world snapshot: ") + e.what());
    }
    if (w.map) w.validate();
    return w;
}

}  // namespace sff
