#include <doctest.h>

#include <cmath>
#include <cstring>

#include "helpers.hpp"
#include "sff/errors.hpp"
#include "sff/grid.hpp"

using namespace sff;

namespace {

ActorState moving(double x, double y, double heading, double speed) {
    ActorState s;
    s.position = {x, y};
    s.heading = heading;
    s.speed = speed;
    return s;
}

GridSpec window_for(const ActorState& s, const VehicleShape& shape, const SafetyProcedure& proc,
                    double pad = 2.0) {
    const double r = envelope_radius(s, shape, proc) + pad;
    const Aabb box{{s.position.x - r, s.position.y - r}, {s.position.x + r, s.position.y + r}};
    return make_window(box, 0.0, 0.5);
}

}  // namespace

TEST_CASE("grid spec validation and indexing") {
    GridSpec spec{{0, 0}, 0.5, 8, 6};
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.size() == 48);
    CHECK(spec.index(1, 2) == 17);
    CHECK(spec.cell_area() == doctest::Approx(0.25));
    CHECK(spec.center(0, 0).x == doctest::Approx(0.25));
    CHECK(spec.center(7, 5).y == doctest::Approx(2.75));
    CHECK(spec.contains({1.0, 1.0}));
    CHECK_FALSE(spec.contains({4.5, 1.0}));

    spec.cell = -1.0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = {{0, 0}, 0.5, 0, 6};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("windows align to the global cell lattice") {
    const double cell = 0.5;
    const GridSpec a = make_window({{0.1, 0.1}, {3.0, 2.0}}, 1.0, cell);
    const GridSpec b = make_window({{0.37, -0.22}, {3.3, 2.6}}, 1.0, cell);
    for (const GridSpec& s : {a, b}) {
        CHECK(std::abs(s.origin.x / cell - std::round(s.origin.x / cell)) < 1e-9);
        CHECK(std::abs(s.origin.y / cell - std::round(s.origin.y / cell)) < 1e-9);
    }
    // covers the padded box
    CHECK(a.origin.x <= 0.1 - 1.0);
    CHECK(a.origin.y <= 0.1 - 1.0);
    CHECK(a.origin.x + a.width * cell >= 3.0 + 1.0);
    CHECK(a.origin.y + a.height * cell >= 2.0 + 1.0);
}

TEST_CASE("bump kernel taps are compact, normalized and symmetric") {
    const MollifierKernel k = mollifier_kernel(1.5, 0.5);
    CHECK(k.half == 3);
    CHECK(k.side() == 7);
    CHECK_FALSE(k.identity);

    double sum = 0.0;
    for (double t : k.taps) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // support ends at the radius
    CHECK(k.tap(3, 0) == 0.0);
    CHECK(k.tap(0, 3) == 0.0);
    CHECK(k.tap(2, 2) > 0.0);  // sqrt(8)/2 = 1.41 m < 1.5 m
    CHECK(k.tap(0, 0) > k.tap(1, 0));
    CHECK(k.tap(0, 0) > k.tap(2, 2));

    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
            CHECK(k.tap(dx, dy) == k.tap(-dx, dy));
            CHECK(k.tap(dx, dy) == k.tap(dy, dx));
        }
}

TEST_CASE("identity kernel must be requested explicitly") {
    CHECK_THROWS_AS(mollifier_kernel(0.3, 0.5), ValidationError);
    const MollifierKernel id = mollifier_kernel(0.3, 0.5, true);
    CHECK(id.identity);
    CHECK(id.half == 0);
    REQUIRE(id.taps.size() == 1);
    CHECK(id.taps[0] == 1.0);
}

TEST_CASE("stamping marks cells whose centers fall inside") {
    GridSpec spec{{0, 0}, 0.5, 10, 10};
    ClaimedSetGrid g = ClaimedSetGrid::zeros(spec);
    // a 2 x 1 m box covering cell centers x in {1.25, 1.75, 2.25, 2.75}, y in {1.25, 1.75}
    stamp_polygon(g, {{1.0, 1.0}, {3.0, 1.0}, {3.0, 2.0}, {1.0, 2.0}});
    CHECK(g.count() == 8);
    CHECK(g.occupancy[spec.index(2, 2)] == 1);
    CHECK(g.occupancy[spec.index(5, 3)] == 1);
    CHECK(g.occupancy[spec.index(6, 2)] == 0);
    const kernels::Region r = g.bounds();
    CHECK(r.x0 == 2);
    CHECK(r.x1 == 5);
    CHECK(r.y0 == 2);
    CHECK(r.y1 == 3);
}

TEST_CASE("a stationary claimed set is exactly the stamped footprint") {
    const VehicleShape shape;
    const SafetyProcedure proc = default_procedure();
    const ActorState s = moving(3.1, -2.4, 0.7, 0.0);
    const GridSpec spec = window_for(s, shape, proc);

    const ClaimedSetGrid claimed = claimed_set(s, shape, proc, spec);
    ClaimedSetGrid stamped = ClaimedSetGrid::zeros(spec);
    stamp_polygon(stamped, footprint_polygon(s, shape));
    CHECK(claimed.occupancy == stamped.occupancy);
    CHECK(claimed.count() > 20);  // sanity: the body covers many half-meter cells
}

TEST_CASE("claimed set reach matches the weakest braking member") {
    const VehicleShape shape;
    const SafetyProcedure proc = default_procedure();
    const ActorState s = moving(0, 0, 0, 10.0);
    const GridSpec spec = window_for(s, shape, proc);
    const ClaimedSetGrid g = claimed_set(s, shape, proc, spec);

    double max_x = -1e9;
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            if (g.occupancy[spec.index(x, y)]) max_x = std::max(max_x, spec.center(x, y).x);
    // nose travels v^2/2a = 12.5 m plus half the body, give or take discretization
    CHECK(max_x > 12.5 + 0.5 * shape.length - 1.0);
    CHECK(max_x < 12.5 + 10.0 * 0.1 + shape.half_diagonal() + 0.5);
}

TEST_CASE("claimed set grows with speed for a straight-line family") {
    const VehicleShape shape;
    SafetyProcedure straight;
    straight.policies = {{4.0, 0.0}};
    const ActorState fast = moving(0, 0, 0, 12.0);
    const GridSpec spec = window_for(fast, shape, straight);

    ClaimedSetGrid prev = claimed_set(moving(0, 0, 0, 0.0), shape, straight, spec);
    for (double v = 3.0; v <= 12.0; v += 3.0) {
        const ClaimedSetGrid cur = claimed_set(moving(0, 0, 0, v), shape, straight, spec);
        // slower stopping paths are prefixes of faster ones
        for (std::size_t i = 0; i < cur.occupancy.size(); ++i)
            if (prev.occupancy[i]) CHECK(cur.occupancy[i] == 1);
        CHECK(cur.count() > prev.count());
        prev = cur;
    }
}

TEST_CASE("full claimed-set union covers every family member") {
    const VehicleShape shape;
    const SafetyProcedure proc = default_procedure();
    const ActorState s = moving(1.0, 0.5, 0.3, 9.0);
    const GridSpec spec = window_for(s, shape, proc);
    const ClaimedSetGrid full = claimed_set(s, shape, proc, spec);

    for (const PolicyParams& p : proc.policies) {
        SafetyProcedure one;
        one.policies = {p};
        const ClaimedSetGrid member = claimed_set(s, shape, one, spec);
        for (std::size_t i = 0; i < full.occupancy.size(); ++i)
            if (member.occupancy[i]) CHECK(full.occupancy[i] == 1);
    }
}

TEST_CASE("stamping is equivariant under lattice translations") {
    const VehicleShape shape;
    const SafetyProcedure proc = default_procedure();
    const ActorState a = moving(0.25, 0.75, 0.4, 8.0);
    const ActorState b = moving(0.25 + 4.0, 0.75 + 7.5, 0.4, 8.0);  // whole cells only

    const GridSpec sa = window_for(a, shape, proc);
    GridSpec sb = sa;
    sb.origin.x += 4.0;
    sb.origin.y += 7.5;

    const ClaimedSetGrid ga = claimed_set(a, shape, proc, sa);
    const ClaimedSetGrid gb = claimed_set(b, shape, proc, sb);
    CHECK(ga.occupancy == gb.occupancy);
}

TEST_CASE("escaping the window is an error that names the overflow") {
    const VehicleShape shape;
    const SafetyProcedure proc = default_procedure();
    const ActorState s = moving(0, 0, 0, 14.0);
    const GridSpec tiny = make_window({{-3, -3}, {3, 3}}, 0.0, 0.5);
    CHECK_THROWS_AS(claimed_set(s, shape, proc, tiny), WindowOverflowError);
    try {
        claimed_set(s, shape, proc, tiny);
    } catch (const WindowOverflowError& e) {
        CHECK(std::string(e.what()).find_first_of("0123456789") != std::string::npos);
    }

    // the clipped variant accepts the same window and stays inside it
    const ClaimedSetGrid clipped = claimed_set_clipped(s, shape, proc, tiny);
    CHECK(clipped.count() > 0);
    CHECK(clipped.count() <= tiny.size());
}

TEST_CASE("mollified field support stays within the kernel dilation") {
    const VehicleShape shape;
    const SafetyProcedure proc = default_procedure();
    const ActorState s = moving(0, 0, 1.2, 6.0);
    const GridSpec spec = window_for(s, shape, proc, 4.0);
    const ClaimedSetGrid g = claimed_set(s, shape, proc, spec);
    const MollifierKernel k = mollifier_kernel(1.5, 0.5);
    const SmoothField f = mollify(g, k);

    REQUIRE(f.spec == spec);
    const kernels::Region occ = g.bounds();
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            if (f.values[spec.index(x, y)] > 0.0) {
                CHECK(x >= occ.x0 - k.half);
                CHECK(x <= occ.x1 + k.half);
                CHECK(y >= occ.y0 - k.half);
                CHECK(y <= occ.y1 + k.half);
            }

    // every occupied cell keeps a strong response, all values stay in [0, 1]
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const double v = f.values[spec.index(x, y)];
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (g.occupancy[spec.index(x, y)]) CHECK(v > 0.2);
        }
}

TEST_CASE("mollify rejects occupancy hugging the border") {
    GridSpec spec{{0, 0}, 0.5, 8, 8};
    ClaimedSetGrid g = ClaimedSetGrid::zeros(spec);
    g.occupancy[spec.index(0, 4)] = 1;  // on the border
    const MollifierKernel k = mollifier_kernel(1.5, 0.5);
    CHECK_THROWS_AS(mollify(g, k), ValidationError);
    CHECK_NOTHROW(mollify_clipped(g, k));
}

TEST_CASE("clipped mollify matches the full convolution away from the border") {
    GridSpec spec{{0, 0}, 0.5, 20, 20};
    ClaimedSetGrid g = ClaimedSetGrid::zeros(spec);
    for (int y = 8; y <= 11; ++y)
        for (int x = 7; x <= 12; ++x) g.occupancy[spec.index(x, y)] = 1;
    const MollifierKernel k = mollifier_kernel(1.5, 0.5);
    const SmoothField a = mollify(g, k);
    const SmoothField b = mollify_clipped(g, k);
    CHECK(a.values == b.values);
}

TEST_CASE("kernel and grid cell sizes must agree") {
    GridSpec spec{{0, 0}, 0.25, 12, 12};
    ClaimedSetGrid g = ClaimedSetGrid::zeros(spec);
    g.occupancy[spec.index(6, 6)] = 1;
    const MollifierKernel k = mollifier_kernel(1.5, 0.5);  // built for 0.5 m cells
    CHECK_THROWS_AS(mollify(g, k), ValidationError);
}

TEST_CASE("field dumps round-trip through 16-bit pgm") {
    const std::string dir = testutil::test_dir("grid_pgm");
    GridSpec spec{{-2.5, 1.0}, 0.5, 9, 5};
    SmoothField f = SmoothField::zeros(spec);
    Rng rng(9);
    for (double& v : f.values) v = rng.uniform(0.0, 1.0);
    f.values[3] = 1.0;
    f.values[7] = 0.0;

    const std::string path = dir + "/field.pgm";
    f.save_pgm(path);
    const SmoothField back = SmoothField::load_pgm(path);
    REQUIRE(back.spec == spec);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        worst = std::max(worst, std::abs(back.values[i] - f.values[i]));
    CHECK(worst <= 0.5 / 65535.0 + 1e-12);
    CHECK(back.max_value() == doctest::Approx(1.0));

    // values above the scale clamp instead of wrapping
    f.values[0] = 3.0;
    f.save_pgm(path, 2.0);
    const SmoothField scaled = SmoothField::load_pgm(path);
    CHECK(scaled.values[0] == doctest::Approx(2.0));

    CHECK_THROWS_AS(SmoothField::load_pgm(dir + "/missing.pgm"), IoError);
    testutil::write_file(dir + "/bad.pgm", "P2\n3 3\n65535\n");
    CHECK_THROWS_AS(SmoothField::load_pgm(dir + "/bad.pgm"), ValidationError);
    // a plain pgm without the frame comment cannot be placed in the world
    testutil::write_file(dir + "/plain.pgm", "P5\n1 1\n65535\n\0\0");
    CHECK_THROWS_AS(SmoothField::load_pgm(dir + "/plain.pgm"), ValidationError);
}

TEST_CASE("nonzero counting uses a strict threshold") {
    GridSpec spec{{0, 0}, 0.5, 4, 1};
    SmoothField f = SmoothField::zeros(spec);
    f.values = {0.0, 0.005, 0.02, 0.5};
    CHECK(f.nonzero_count(0.0) == 3);
    CHECK(f.nonzero_count(0.01) == 2);
    CHECK(f.max_value() == doctest::Approx(0.5));
}
