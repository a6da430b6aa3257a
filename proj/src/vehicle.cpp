#include "sff/vehicle.hpp"

#include <algorithm>

#include "sff/errors.hpp"

namespace sff {

void VehicleShape::validate() const {
    if (!(length > 0.0) || !(width > 0.0) || !(wheelbase > 0.0) || !(wheelbase < length)) {
        throw ValidationError("VehicleShape: need 0 < wheelbase < length and width > 0");
    }
}

void ActorState::validate() const {
    if (!std::isfinite(position.x) || !std::isfinite(position.y) || !std::isfinite(heading) ||
        !std::isfinite(speed)) {
        throw ValidationError("ActorState: non-finite field");
    }
    if (speed < 0.0) throw ValidationError("ActorState: negative speed");
}

ControlInput clamp_control(ControlInput u, const ControlLimits& lim) {
    u.accel = std::clamp(u.accel, -lim.accel_abs_max, lim.accel_abs_max);
    u.steer = std::clamp(u.steer, -lim.steer_max, lim.steer_max);
    return u;
}

ActorState step_kinematics(const ActorState& state, const ControlInput& u,
                           const VehicleShape& shape, double dt) {
    if (!(dt > 0.0)) throw ValidationError("step_kinematics: dt must be positive");
    if (!std::isfinite(u.accel) || !std::isfinite(u.steer)) {
        throw ValidationError("step_kinematics: non-finite control");
    }
    state.validate();
    shape.validate();

    ActorState next = state;
    next.speed = std::max(0.0, state.speed + u.accel * dt);
    const double mean_speed = 0.5 * (state.speed + next.speed);
    next.position = state.position +
                    Vec2{std::cos(state.heading), std::sin(state.heading)} * (mean_speed * dt);
    next.heading =
        normalize_angle(state.heading + (state.speed / shape.wheelbase) * std::tan(u.steer) * dt);
    return next;
}

Polygon footprint_polygon(const ActorState& state, const VehicleShape& shape) {
    state.validate();
    shape.validate();
    const double hl = 0.5 * shape.length;
    const double hw = 0.5 * shape.width;
    const Vec2 fwd = Vec2{std::cos(state.heading), std::sin(state.heading)};
    const Vec2 left = fwd.perp();
    return {
        state.position + fwd * hl - left * hw,
        state.position + fwd * hl + left * hw,
        state.position - fwd * hl + left * hw,
        state.position - fwd * hl - left * hw,
    };
}

}  // namespace sff
