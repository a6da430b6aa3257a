#include <doctest.h>

#include <cmath>

#include "sff/errors.hpp"
#include "sff/vehicle.hpp"

using namespace sff;

namespace {

ActorState make_state(double x, double y, double heading, double speed) {
    ActorState s;
    s.position = {x, y};
    s.heading = heading;
    s.speed = speed;
    return s;
}

}  // namespace

TEST_CASE("shape validation") {
    VehicleShape ok;
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.half_diagonal() == doctest::Approx(0.5 * std::hypot(4.5, 1.9)));

    VehicleShape bad = ok;
    bad.wheelbase = 5.0;  // longer than the body
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = ok;
    bad.length = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("state validation") {
    CHECK_NOTHROW(make_state(0, 0, 0, 5).validate());
    CHECK_THROWS_AS(make_state(0, 0, 0, -1).validate(), ValidationError);
    CHECK_THROWS_AS(make_state(0, 0, std::nan(""), 5).validate(), ValidationError);
}

TEST_CASE("control clamp") {
    const ControlLimits lim;
    ControlInput u = clamp_control({100.0, -2.0}, lim);
    CHECK(u.accel == doctest::Approx(lim.accel_abs_max));
    CHECK(u.steer == doctest::Approx(-lim.steer_max));
    u = clamp_control({-100.0, 0.1}, lim);
    CHECK(u.accel == doctest::Approx(-lim.accel_abs_max));
    CHECK(u.steer == doctest::Approx(0.1));
}

TEST_CASE("straight coasting step advances one mean-speed increment") {
    const VehicleShape shape;
    const ActorState next = step_kinematics(make_state(0, 0, 0, 10), {0.0, 0.0}, shape, 0.1);
    CHECK(next.position.x == doctest::Approx(1.0));
    CHECK(next.position.y == doctest::Approx(0.0));
    CHECK(next.speed == 10.0);      // zero accel leaves speed untouched
    CHECK(next.heading == 0.0);     // zero steer leaves heading untouched
}

TEST_CASE("speed clamps at zero and displacement uses the mean speed") {
    const VehicleShape shape;
    const ActorState next = step_kinematics(make_state(0, 0, 0, 1.0), {-20.0, 0.0}, shape, 0.1);
    CHECK(next.speed == 0.0);
    CHECK(next.position.x == doctest::Approx(0.05));
}

TEST_CASE("heading integrates the bicycle yaw rate") {
    const VehicleShape shape;  // wheelbase 2.7
    const ActorState next = step_kinematics(make_state(0, 0, 0, 10), {0.0, 0.1}, shape, 0.1);
    CHECK(next.heading == doctest::Approx(10.0 / 2.7 * std::tan(0.1) * 0.1).epsilon(1e-12));
    // displacement follows the entry heading, not the exit heading
    CHECK(next.position.y == doctest::Approx(0.0));
    CHECK(next.position.x == doctest::Approx(1.0));
}

TEST_CASE("heading stays normalized across many turning steps") {
    const VehicleShape shape;
    ActorState s = make_state(0, 0, 3.0, 12);
    for (int i = 0; i < 400; ++i) {
        s = step_kinematics(s, {0.0, 0.3}, shape, 0.1);
        CHECK(s.heading > -M_PI - 1e-12);
        CHECK(s.heading <= M_PI + 1e-12);
    }
}

TEST_CASE("constant braking covers exactly v^2/2a when the step count divides evenly") {
    const VehicleShape shape;
    ActorState s = make_state(0, 0, 0, 10);
    int steps = 0;
    while (s.speed > 0.0) {
        s = step_kinematics(s, {-4.0, 0.0}, shape, 0.1);
        ++steps;
    }
    CHECK(steps == 25);  // 10 / (4 * 0.1)
    CHECK(s.position.x == doctest::Approx(12.5).epsilon(1e-9));
}

TEST_CASE("non-finite control is rejected") {
    const VehicleShape shape;
    CHECK_THROWS_AS(step_kinematics(make_state(0, 0, 0, 5), {std::nan(""), 0.0}, shape, 0.1),
                    ValidationError);
    CHECK_THROWS_AS(step_kinematics(make_state(0, 0, 0, 5), {0.0, 0.0}, shape, 0.0),
                    ValidationError);
}

TEST_CASE("footprint is the oriented body rectangle") {
    VehicleShape shape;
    shape.length = 4.0;
    shape.width = 2.0;
    shape.wheelbase = 2.5;

    const Polygon flat = footprint_polygon(make_state(0, 0, 0, 0), shape);
    REQUIRE(flat.size() == 4);
    double max_x = -1e9, max_y = -1e9, min_x = 1e9, min_y = 1e9;
    for (const Vec2& p : flat) {
        max_x = std::max(max_x, p.x);
        min_x = std::min(min_x, p.x);
        max_y = std::max(max_y, p.y);
        min_y = std::min(min_y, p.y);
    }
    CHECK(max_x == doctest::Approx(2.0));
    CHECK(min_x == doctest::Approx(-2.0));
    CHECK(max_y == doctest::Approx(1.0));
    CHECK(min_y == doctest::Approx(-1.0));
    CHECK(polygon_area(flat) == doctest::Approx(8.0).epsilon(1e-12));  // CCW

    // quarter turn swaps the extents
    const Polygon turned = footprint_polygon(make_state(0, 0, M_PI / 2.0, 0), shape);
    Aabb box = polygon_bounds(turned);
    CHECK(box.hi.y == doctest::Approx(2.0));
    CHECK(box.hi.x == doctest::Approx(1.0));

    // area is rotation invariant
    for (double h = -3.0; h < 3.0; h += 0.7) {
        const Polygon poly = footprint_polygon(make_state(5, -2, h, 3), shape);
        CHECK(polygon_area(poly) == doctest::Approx(8.0).epsilon(1e-9));
    }
}

TEST_CASE("footprint centers on the position") {
    VehicleShape shape;
    const Polygon poly = footprint_polygon(make_state(7.0, -3.0, 1.1, 2.0), shape);
    Vec2 centroid{0, 0};
    for (const Vec2& p : poly) centroid += p;
    centroid = centroid * 0.25;
    CHECK(centroid.x == doctest::Approx(7.0));
    CHECK(centroid.y == doctest::Approx(-3.0));
}
