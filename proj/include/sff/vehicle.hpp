#pragma once

#include <cstdint>

#include "sff/geometry.hpp"

namespace sff {

using ActorId = std::uint32_t;
inline constexpr ActorId kNoActor = static_cast<ActorId>(-1);

struct VehicleShape {
    double length = 4.5;     // m
    double width = 1.9;      // m
    double wheelbase = 2.7;  // m, must be < length

    void validate() const;
    double half_diagonal() const { return 0.5 * std::hypot(length, width); }
};

// Pose and speed of one vehicle. Heading is normalized into (-pi, pi],
// speed is never negative (no reverse).
struct ActorState {
    ActorId id = 0;
    Vec2 position;
    double heading = 0.0;  // rad
    double speed = 0.0;    // m/s

    void validate() const;
};

struct ControlInput {
    double accel = 0.0;  // m/s^2, longitudinal
    double steer = 0.0;  // rad, front-wheel angle
};

struct ControlLimits {
    double accel_abs_max = 8.0;  // m/s^2
    double steer_max = 0.6;      // rad
    double accel_fwd_max = 3.0;  // m/s^2, comfort cap on throttle
};

ControlInput clamp_control(ControlInput u, const ControlLimits& lim);

// One kinematic bicycle step. Speed clamps at zero; the position advances
// along the entry heading at the mean of entry and exit speed.
ActorState step_kinematics(const ActorState& state, const ControlInput& u,
                           const VehicleShape& shape, double dt);

// Oriented footprint rectangle (4 vertices, CCW), centered on the position.
Polygon footprint_polygon(const ActorState& state, const VehicleShape& shape);

}  // namespace sff
