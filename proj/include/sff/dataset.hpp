#pragma once

#include <cstdint>

#include "sff/predictor.hpp"
#include "sff/sim.hpp"

namespace sff {

struct DatasetOptions {
    int episodes = 10;
    int steps = 500;       // per episode
    int vehicles = 10;     // total actors, all traffic-driven
    int sample_every = 10; // steps between samples
    AggressionLevel aggression = AggressionLevel::Intermediate;
    ScenarioConfig scenario; // map and controller template; counts overridden
};

// Generated traffic episodes sampled into (features, oracle actions) pairs:
// every vehicle contributes one example each sample tick. The default options
// yield episodes x steps/sample_every x vehicles examples.
Dataset generate_dataset(const DatasetOptions& options, std::uint64_t seed);

}  // namespace sff
