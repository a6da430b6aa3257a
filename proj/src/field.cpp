#include "sff/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sff/errors.hpp"

namespace sff {

FieldParams FieldParams::defaults() {
    FieldParams fp;
    fp.proc = default_procedure();
    fp.cell = 0.5;
    fp.kernel = mollifier_kernel(1.5, fp.cell);
    fp.fd_step = 0.25;
    return fp;
}

void FieldParams::validate() const {
    proc.validate();
    if (!(cell > 0.0)) throw ValidationError("field cell size must be positive");
    if (!kernel.identity && kernel.cell != cell)
        throw ValidationError("kernel cell size disagrees with field cell size");
    if (!(fd_step > 0.0)) throw ValidationError("finite-difference step must be positive");
}

double safety_potential(const SmoothField& a, const SmoothField& b) {
    if (!(a.spec == b.spec))
        throw ValidationError("safety potential needs both fields on one grid");
    const kernels::Region full{0, 0, a.spec.width - 1, a.spec.height - 1};
    return kernels::par::masked_dot(a.spec.width, a.values.data(), b.values.data(), full,
                                    a.spec.cell_area());
}

namespace {

double effective_radius(const ActorState& s, const VehicleShape& shape, const FieldParams& fp) {
    const double kr = fp.kernel.identity ? 0.0 : fp.kernel.radius;
    return envelope_radius(s, shape, fp.proc) + kr;
}

}  // namespace

std::optional<GridSpec> pair_window(const ActorState& a, const VehicleShape& sa,
                                    const ActorState& b, const VehicleShape& sb,
                                    const FieldParams& fp) {
    const double ra = effective_radius(a, sa, fp);
    const double rb = effective_radius(b, sb, fp);
    if ((a.position - b.position).norm() >= ra + rb) return std::nullopt;
    // bbox of the disc intersection: overlap of the two disc bboxes
    const Aabb lens{{std::max(a.position.x - ra, b.position.x - rb),
                     std::max(a.position.y - ra, b.position.y - rb)},
                    {std::min(a.position.x + ra, b.position.x + rb),
                     std::min(a.position.y + ra, b.position.y + rb)}};
    if (lens.lo.x >= lens.hi.x || lens.lo.y >= lens.hi.y) return std::nullopt;
    const double kr = fp.kernel.identity ? 0.0 : fp.kernel.radius;
    return make_window(lens, kr + fp.cell, fp.cell);
}

namespace {

double pair_potential_states(const ActorState& a, const VehicleShape& sa, const ActorState& b,
                             const VehicleShape& sb, const FieldParams& fp) {
    const std::optional<GridSpec> window = pair_window(a, sa, b, sb, fp);
    if (!window) return 0.0;
    const ClaimedSetGrid occ_a = claimed_set_clipped(a, sa, fp.proc, *window);
    const ClaimedSetGrid occ_b = claimed_set_clipped(b, sb, fp.proc, *window);
    const kernels::Region ba = occ_a.bounds();
    const kernels::Region bb = occ_b.bounds();
    if (ba.empty() || bb.empty()) return 0.0;
    const SmoothField fa = mollify_clipped(occ_a, fp.kernel);
    const SmoothField fb = mollify_clipped(occ_b, fp.kernel);
    const kernels::Region da = ba.dilated(fp.kernel.half).clipped(window->width, window->height);
    const kernels::Region db = bb.dilated(fp.kernel.half).clipped(window->width, window->height);
    const kernels::Region both{std::max(da.x0, db.x0), std::max(da.y0, db.y0),
                               std::min(da.x1, db.x1), std::min(da.y1, db.y1)};
    if (both.empty()) return 0.0;
    return kernels::par::masked_dot(window->width, fa.values.data(), fb.values.data(), both,
                                    window->cell_area());
}

}  // namespace

double pair_potential(const WorldState& world, ActorId a, ActorId b, const FieldParams& fp) {
    fp.validate();
    const Actor& aa = world.actor(a);
    const Actor& ab = world.actor(b);
    return pair_potential_states(aa.state, aa.shape, ab.state, ab.shape, fp);
}

Vec2 safety_force(const WorldState& world, ActorId a, ActorId b, const FieldParams& fp) {
    fp.validate();
    const Actor& aa = world.actor(a);
    const Actor& ab = world.actor(b);
    const double h = fp.fd_step;
    Vec2 force;
    for (int axis = 0; axis < 2; ++axis) {
        ActorState plus = aa.state, minus = aa.state;
        (axis == 0 ? plus.position.x : plus.position.y) += h;
        (axis == 0 ? minus.position.x : minus.position.y) -= h;
        const double rp = pair_potential_states(plus, aa.shape, ab.state, ab.shape, fp);
        const double rm = pair_potential_states(minus, aa.shape, ab.state, ab.shape, fp);
        (axis == 0 ? force.x : force.y) = -(rp - rm) / (2.0 * h);
    }
    return force;
}

SafetyReading safety_reading(const WorldState& world, ActorId a, ActorId b,
                             const FieldParams& fp) {
    SafetyReading r;
    r.a = a;
    r.b = b;
    r.rho = pair_potential(world, a, b, fp);
    r.force = safety_force(world, a, b, fp);
    return r;
}

// --- non-increase verification -------------------------------------------

PolicyParams strongest_policy(const SafetyProcedure& proc) {
    proc.validate();
    PolicyParams best = proc.policies.front();
    for (const PolicyParams& p : proc.policies)
        if (p.decel > best.decel ||
            (p.decel == best.decel && std::abs(p.steer_hold) < std::abs(best.steer_hold)))
            best = p;
    return best;
}

NonIncreaseReport verify_nonincrease(const WorldState& start, ActorId a, ActorId b,
                                     const FieldParams& fp, const NonIncreaseParams& np) {
    fp.validate();
    if (!(np.duration >= np.dt) || !(np.dt > 0.0))
        throw ValidationError("verification needs duration >= dt > 0");
    Actor actor_a = start.actor(a);
    Actor actor_b = start.actor(b);
    const PolicyParams brake = strongest_policy(fp.proc);
    const ControlInput u{-brake.decel, brake.steer_hold};

    NonIncreaseReport report;
    const int steps = static_cast<int>(std::round(np.duration / np.dt));
    double prev = 0.0;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * np.dt;
        const double rho =
            pair_potential_states(actor_a.state, actor_a.shape, actor_b.state, actor_b.shape, fp);
        if (k == 0) {
            report.tolerance = np.tol_rel * rho + np.tol_abs;
        } else {
            const double uptick = rho - prev;
            report.max_uptick = std::max(report.max_uptick, uptick);
            if (uptick > report.tolerance) report.violations.push_back({t, uptick});
        }
        report.trace.push_back({t, rho});
        prev = rho;
        if (k < steps) {
            actor_a.state = step_kinematics(actor_a.state, u, actor_a.shape, np.dt);
            actor_b.state = step_kinematics(actor_b.state, u, actor_b.shape, np.dt);
        }
    }
    return report;
}

nlohmann::json NonIncreaseReport::to_json() const {
    nlohmann::json j;
    j["tolerance"] = tolerance;
    j["max_uptick"] = max_uptick;
    j["violation_count"] = violations.size();
    j["violations"] = nlohmann::json::array();
    for (const auto& [t, d] : violations) j["violations"].push_back({{"t", t}, {"uptick", d}});
    j["trace"] = nlohmann::json::array();
    for (const auto& [t, rho] : trace) j["trace"].push_back({{"t", t}, {"rho", rho}});
    return j;
}

void NonIncreaseReport::trace_to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "t,rho\n";
    char line[80];
    for (const auto& [t, rho] : trace) {
        std::snprintf(line, sizeof line, "%.6f,%.17g\n", t, rho);
        out << line;
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace sff
