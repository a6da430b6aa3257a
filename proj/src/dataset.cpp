#include "sff/dataset.hpp"

#include "sff/errors.hpp"

namespace sff {

Dataset generate_dataset(const DatasetOptions& options, std::uint64_t seed) {
    if (options.episodes < 1) throw ValidationError("dataset needs at least one episode");
    if (options.steps < 1) throw ValidationError("dataset episodes need at least one step");
    if (options.vehicles < 1) throw ValidationError("dataset needs at least one vehicle");
    if (options.sample_every < 1) throw ValidationError("sample interval must be positive");

    Dataset data;
    data.seed = seed;
    const Rng root(seed);
    for (int e = 0; e < options.episodes; ++e) {
        ScenarioConfig cfg = options.scenario;
        cfg.npc_count = options.vehicles - 1;
        cfg.steps = options.steps;
        cfg.aggression = options.aggression;
        cfg.seed = root.derive("episode", static_cast<std::uint64_t>(e)).seed();
        cfg.log_path.clear();
        Simulation sim(cfg);
        sim.ego_driven = false; // every actor behaves as traffic
        for (int k = 1; k <= options.steps; ++k) {
            sim.step();
            if (k % options.sample_every != 0) continue;
            for (const Actor& actor : sim.world().actors) {
                Example ex;
                ex.features = featurize(sim.world(), actor.state.id, sim.drivable());
                const ActionSet actions =
                    oracle_action_set(actor.state, actor.shape, cfg.fields.proc);
                ex.actions.reserve(actions.size() * 2);
                for (const ActionPair& a : actions) {
                    ex.actions.push_back(a.ax);
                    ex.actions.push_back(a.ay);
                }
                ex.speed = actor.state.speed;
                ex.shape = actor.shape;
                data.examples.push_back(std::move(ex));
            }
        }
    }
    data.split();
    return data;
}

}  // namespace sff
