#include "sff/config.hpp"

#include <algorithm>
#include <fstream>

#include "sff/errors.hpp"

namespace sff {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ValidationError(std::string(section) + " must be a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ValidationError("unknown key '" + item.key() + "' in " + section);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("bad value for '" + std::string(key) + "': " + e.what());
    }
}

std::vector<double> read_levels(const json& j, const char* key,
                                const std::vector<double>& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ValidationError("bad value for '" + std::string(key) + "': " + e.what());
    }
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j) {
    check_keys(j, "scenario",
               {"map", "traffic", "episode", "procedure", "field", "gains", "rss", "limits"});
    ScenarioConfig cfg;

    if (j.contains("map")) {
        const json& m = j.at("map");
        check_keys(m, "map", {"rows", "cols", "block", "lanes_per_dir", "lane_width",
                              "speed_limit"});
        read(m, "rows", cfg.rows);
        read(m, "cols", cfg.cols);
        read(m, "block", cfg.block);
        read(m, "lanes_per_dir", cfg.lanes_per_dir);
        read(m, "lane_width", cfg.lane_width);
        read(m, "speed_limit", cfg.speed_limit);
    }
    if (j.contains("traffic")) {
        const json& t = j.at("traffic");
        check_keys(t, "traffic", {"npc_count", "aggression"});
        read(t, "npc_count", cfg.npc_count);
        if (t.contains("aggression"))
            cfg.aggression = aggression_from_name(t.at("aggression").get<std::string>());
    }
    if (j.contains("episode")) {
        const json& e = j.at("episode");
        check_keys(e, "episode",
                   {"steps", "dt", "seed", "policy", "arrive_radius", "min_destination",
                    "claimed_set_source", "model_path", "log_path"});
        read(e, "steps", cfg.steps);
        read(e, "dt", cfg.dt);
        read(e, "seed", cfg.seed);
        if (e.contains("policy")) cfg.policy = policy_from_name(e.at("policy").get<std::string>());
        read(e, "arrive_radius", cfg.arrive_radius);
        read(e, "min_destination", cfg.min_destination);
        if (e.contains("claimed_set_source")) {
            const std::string source = e.at("claimed_set_source").get<std::string>();
            if (source == "oracle") cfg.source = ClaimedSetSource::Oracle;
            else if (source == "model") cfg.source = ClaimedSetSource::Model;
            else throw ValidationError("claimed_set_source must be 'oracle' or 'model'");
        }
        read(e, "model_path", cfg.model_path);
        read(e, "log_path", cfg.log_path);
    }

    ProcedureConfig proc;
    double kernel_radius = cfg.fields.kernel.radius;
    bool kernel_identity = cfg.fields.kernel.identity;
    if (j.contains("procedure")) {
        const json& p = j.at("procedure");
        check_keys(p, "procedure", {"decel_levels", "steer_levels", "horizon", "dt"});
        proc.decel_levels = read_levels(p, "decel_levels", proc.decel_levels);
        proc.steer_levels = read_levels(p, "steer_levels", proc.steer_levels);
        read(p, "horizon", proc.horizon);
        read(p, "dt", proc.dt);
    }
    if (j.contains("field")) {
        const json& f = j.at("field");
        check_keys(f, "field", {"cell", "kernel_radius", "kernel_identity", "fd_step"});
        read(f, "cell", cfg.fields.cell);
        read(f, "kernel_radius", kernel_radius);
        read(f, "kernel_identity", kernel_identity);
        read(f, "fd_step", cfg.fields.fd_step);
    }
    cfg.fields.proc = default_procedure(proc);
    cfg.fields.kernel = mollifier_kernel(kernel_radius, cfg.fields.cell, kernel_identity);

    if (j.contains("gains")) {
        const json& g = j.at("gains");
        check_keys(g, "gains",
                   {"k_v", "k_rho", "lookahead_min", "lookahead_time", "red_stop_zone",
                    "gap_time", "comfort_decel", "min_gap", "leader_range"});
        read(g, "k_v", cfg.gains.k_v);
        read(g, "k_rho", cfg.gains.k_rho);
        read(g, "lookahead_min", cfg.gains.lookahead_min);
        read(g, "lookahead_time", cfg.gains.lookahead_time);
        read(g, "red_stop_zone", cfg.gains.red_stop_zone);
        read(g, "gap_time", cfg.gains.gap_time);
        read(g, "comfort_decel", cfg.gains.comfort_decel);
        read(g, "min_gap", cfg.gains.min_gap);
        read(g, "leader_range", cfg.gains.leader_range);
    }
    if (j.contains("rss")) {
        const json& r = j.at("rss");
        check_keys(r, "rss", {"ttc_long", "ttc_lat", "response_decel", "steer_bias"});
        read(r, "ttc_long", cfg.rss.ttc_long);
        read(r, "ttc_lat", cfg.rss.ttc_lat);
        read(r, "response_decel", cfg.rss.response_decel);
        read(r, "steer_bias", cfg.rss.steer_bias);
    }
    if (j.contains("limits")) {
        const json& l = j.at("limits");
        check_keys(l, "limits", {"accel_abs_max", "steer_max", "accel_fwd_max"});
        read(l, "accel_abs_max", cfg.limits.accel_abs_max);
        read(l, "steer_max", cfg.limits.steer_max);
        read(l, "accel_fwd_max", cfg.limits.accel_fwd_max);
    }
    cfg.validate();
    return cfg;
}

nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    json procedure;
    {
        // The cross-product construction loses the level lists; recover them
        // from the policy family itself.
        std::vector<double> decels, steers;
        for (const PolicyParams& p : cfg.fields.proc.policies) {
            if (std::find(decels.begin(), decels.end(), p.decel) == decels.end())
                decels.push_back(p.decel);
            if (std::find(steers.begin(), steers.end(), p.steer_hold) == steers.end())
                steers.push_back(p.steer_hold);
        }
        procedure = {{"decel_levels", decels},
                     {"steer_levels", steers},
                     {"horizon", cfg.fields.proc.horizon},
                     {"dt", cfg.fields.proc.dt}};
    }
    return {
        {"map",
         {{"rows", cfg.rows},
          {"cols", cfg.cols},
          {"block", cfg.block},
          {"lanes_per_dir", cfg.lanes_per_dir},
          {"lane_width", cfg.lane_width},
          {"speed_limit", cfg.speed_limit}}},
        {"traffic",
         {{"npc_count", cfg.npc_count}, {"aggression", aggression_name(cfg.aggression)}}},
        {"episode",
         {{"steps", cfg.steps},
          {"dt", cfg.dt},
          {"seed", cfg.seed},
          {"policy", policy_name(cfg.policy)},
          {"arrive_radius", cfg.arrive_radius},
          {"min_destination", cfg.min_destination},
          {"claimed_set_source", cfg.source == ClaimedSetSource::Model ? "model" : "oracle"},
          {"model_path", cfg.model_path},
          {"log_path", cfg.log_path}}},
        {"procedure", std::move(procedure)},
        {"field",
         {{"cell", cfg.fields.cell},
          {"kernel_radius", cfg.fields.kernel.radius},
          {"kernel_identity", cfg.fields.kernel.identity},
          {"fd_step", cfg.fields.fd_step}}},
        {"gains",
         {{"k_v", cfg.gains.k_v},
          {"k_rho", cfg.gains.k_rho},
          {"lookahead_min", cfg.gains.lookahead_min},
          {"lookahead_time", cfg.gains.lookahead_time},
          {"red_stop_zone", cfg.gains.red_stop_zone},
          {"gap_time", cfg.gains.gap_time},
          {"comfort_decel", cfg.gains.comfort_decel},
          {"min_gap", cfg.gains.min_gap},
          {"leader_range", cfg.gains.leader_range}}},
        {"rss",
         {{"ttc_long", cfg.rss.ttc_long},
          {"ttc_lat", cfg.rss.ttc_lat},
          {"response_decel", cfg.rss.response_decel},
          {"steer_bias", cfg.rss.steer_bias}}},
        {"limits",
         {{"accel_abs_max", cfg.limits.accel_abs_max},
          {"steer_max", cfg.limits.steer_max},
          {"accel_fwd_max", cfg.limits.accel_fwd_max}}}};
}

void ExperimentSpec::validate() const {
    if (policies.empty()) throw ValidationError("experiment needs at least one policy");
    if (levels.empty()) throw ValidationError("experiment needs at least one aggression level");
    if (iterations < 1) throw ValidationError("experiment needs at least one iteration");
    scenario.validate();
}

ExperimentSpec experiment_from_json(const json& j) {
    check_keys(j, "experiment", {"policies", "aggressions", "iterations", "base_seed",
                                 "scenario"});
    ExperimentSpec spec;
    try {
        if (j.contains("policies")) {
            spec.policies.clear();
            for (const auto& name : j.at("policies"))
                spec.policies.push_back(policy_from_name(name.get<std::string>()));
        }
        if (j.contains("aggressions")) {
            spec.levels.clear();
            for (const auto& name : j.at("aggressions"))
                spec.levels.push_back(aggression_from_name(name.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad experiment lists: ") + e.what());
    }
    read(j, "iterations", spec.iterations);
    read(j, "base_seed", spec.base_seed);
    if (j.contains("scenario")) spec.scenario = scenario_from_json(j.at("scenario"));
    spec.validate();
    return spec;
}

nlohmann::json experiment_to_json(const ExperimentSpec& spec) {
    json policies = json::array();
    for (PolicyKind p : spec.policies) policies.push_back(policy_name(p));
    json levels = json::array();
    for (AggressionLevel l : spec.levels) levels.push_back(aggression_name(l));
    return {{"policies", std::move(policies)},
            {"aggressions", std::move(levels)},
            {"iterations", spec.iterations},
            {"base_seed", spec.base_seed},
            {"scenario", scenario_to_json(spec.scenario)}};
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("bad JSON in '" + path + "': " + e.what());
    }
}

ScenarioConfig load_scenario(const std::string& path) {
    return scenario_from_json(load_json_file(path));
}

ExperimentSpec load_experiment(const std::string& path) {
    return experiment_from_json(load_json_file(path));
}

}  // namespace sff
