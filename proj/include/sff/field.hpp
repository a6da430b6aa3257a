#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sff/grid.hpp"
#include "sff/world.hpp"

namespace sff {

// Everything needed to turn an actor state into a smoothed claimed-set field.
struct FieldParams {
    SafetyProcedure proc;
    MollifierKernel kernel;
    double cell = 0.5;   // m
    double fd_step = 0.25; // m, finite-difference displacement for the force

    static FieldParams defaults();
    void validate() const;
};

struct SafetyReading {
    double rho = 0.0;
    Vec2 force;
    ActorId a = kNoActor, b = kNoActor;
};

// rho = sum over cells of a * b * cell_area. Specs must match exactly.
double safety_potential(const SmoothField& a, const SmoothField& b);

// Shared window for one actor pair: the intersection region of the two
// stopping envelopes, padded by the kernel radius and aligned to the global
// cell lattice. Empty when the envelopes cannot touch (rho is exactly 0).
// Fields computed on this window reproduce the full-plane potential exactly:
// clipping only discards occupancy too far from the lens to influence any
// cell where the product of the two fields can be nonzero.
std::optional<GridSpec> pair_window(const ActorState& a, const VehicleShape& sa,
                                    const ActorState& b, const VehicleShape& sb,
                                    const FieldParams& fp);

// Pairwise potential between two actors in the world (0 when out of range).
double pair_potential(const WorldState& world, ActorId a, ActorId b, const FieldParams& fp);

// Central finite difference of pair_potential with respect to actor a's
// position; claimed sets are recomputed at each displaced state.
Vec2 safety_force(const WorldState& world, ActorId a, ActorId b, const FieldParams& fp);

SafetyReading safety_reading(const WorldState& world, ActorId a, ActorId b,
                             const FieldParams& fp);

// --- non-increase verification -------------------------------------------

struct NonIncreaseParams {
    double duration = 3.0; // s
    double dt = 0.1;       // s
    double tol_rel = 1e-2; // of rho at t=0
    double tol_abs = 1e-9;
};

struct NonIncreaseReport {
    std::vector<std::pair<double, double>> trace;      // (t, rho)
    std::vector<std::pair<double, double>> violations; // (t, uptick beyond tolerance source)
    double max_uptick = 0.0;                           // largest step-to-step increase
    double tolerance = 0.0;

    nlohmann::json to_json() const;
    void trace_to_csv(const std::string& path) const; // columns: t, rho
};

// Max-decel policy, ties broken by smallest steering magnitude.
PolicyParams strongest_policy(const SafetyProcedure& proc);

// Drives both actors with the strongest-braking policy and records rho per
// step. Violations are steps whose rho increase exceeds
// tol_rel * rho(0) + tol_abs.
NonIncreaseReport verify_nonincrease(const WorldState& start, ActorId a, ActorId b,
                                     const FieldParams& fp, const NonIncreaseParams& np = {});

}  // namespace sff
