#include "sff/procedure.hpp"

#include <algorithm>
#include <cmath>

#include "sff/errors.hpp"

namespace sff {

void SafetyProcedure::validate(const ControlLimits& limits) const {
    if (policies.empty()) throw ValidationError("safety procedure has no policies");
    if (!(horizon > 0.0) || !(dt > 0.0) || horizon < dt)
        throw ValidationError("procedure needs horizon >= dt > 0");
    for (const PolicyParams& p : policies) {
        if (!(p.decel >= 0.0) || p.decel > limits.accel_abs_max)
            throw ValidationError("policy decel outside control bounds");
        if (std::abs(p.steer_hold) > limits.steer_max)
            throw ValidationError("policy steer outside control bounds");
    }
}

SafetyProcedure default_procedure(const ProcedureConfig& cfg) {
    if (cfg.decel_levels.empty() || cfg.steer_levels.empty())
        throw ValidationError("procedure needs at least one decel and one steer level");
    SafetyProcedure proc;
    proc.horizon = cfg.horizon;
    proc.dt = cfg.dt;
    for (double d : cfg.decel_levels)
        for (double s : cfg.steer_levels) proc.policies.push_back({d, s});
    proc.validate();
    return proc;
}

Trajectory rollout(const ActorState& state, const VehicleShape& shape, const PolicyParams& policy,
                   double horizon, double dt) {
    state.validate();
    shape.validate();
    if (!(dt > 0.0) || horizon < dt) throw ValidationError("rollout needs horizon >= dt > 0");
    if (!(policy.decel >= 0.0) || !std::isfinite(policy.decel) || !std::isfinite(policy.steer_hold))
        throw ValidationError("rollout policy must have finite decel >= 0");

    Trajectory traj;
    traj.dt = dt;
    traj.samples.push_back(state);
    const ControlInput u{-policy.decel, policy.steer_hold};
    const int steps = static_cast<int>(std::round(horizon / dt));
    for (int i = 0; i < steps && traj.samples.back().speed > 0.0; ++i)
        traj.samples.push_back(step_kinematics(traj.samples.back(), u, shape, dt));
    return traj;
}

double envelope_radius(const ActorState& state, const VehicleShape& shape,
                       const SafetyProcedure& proc) {
    proc.validate();
    const double v = state.speed;
    double reach = 0.0;
    for (const PolicyParams& p : proc.policies) {
        const double dist = p.decel > 0.0 ? std::min(v * v / (2.0 * p.decel), v * proc.horizon)
                                          : v * proc.horizon;
        reach = std::max(reach, dist);
    }
    return reach + v * proc.dt + shape.half_diagonal();
}

}  // namespace sff
