#pragma once

#include <vector>

#include "sff/vehicle.hpp"

namespace sff {

// One member of the safety-procedure family: brake at a fixed rate while
// holding a fixed steering angle, until standstill or the horizon.
struct PolicyParams {
    double decel = 6.0;      // m/s^2, >= 0, applied until standstill
    double steer_hold = 0.0; // rad
};

struct SafetyProcedure {
    std::vector<PolicyParams> policies;
    double horizon = 3.0; // s
    double dt = 0.1;      // s

    void validate(const ControlLimits& limits = {}) const;
};

struct ProcedureConfig {
    std::vector<double> decel_levels{4.0, 6.0, 8.0};
    std::vector<double> steer_levels{-0.05, 0.0, 0.05};
    double horizon = 3.0;
    double dt = 0.1;
};

// Cross product of decel and steer levels, decel-major order.
SafetyProcedure default_procedure(const ProcedureConfig& cfg = {});

struct Trajectory {
    double dt = 0.1;
    std::vector<ActorState> samples; // samples[0] is the initial state
};

// Applies ControlInput(-decel, steer_hold) step by step. Stops sampling once
// the vehicle is at rest (holding a stopped vehicle adds no new footprint).
Trajectory rollout(const ActorState& state, const VehicleShape& shape, const PolicyParams& policy,
                   double horizon, double dt);

// Upper bound on how far any point of the body can travel from the initial
// position under the weakest policy, plus body extent. Discrete steps may
// overshoot the continuous v^2/2b distance by up to v*dt.
double envelope_radius(const ActorState& state, const VehicleShape& shape,
                       const SafetyProcedure& proc);

}  // namespace sff
