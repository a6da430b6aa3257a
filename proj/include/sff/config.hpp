#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sff/sim.hpp"

namespace sff {

// Scenario settings as JSON, every section and key optional over defaults.
// Unknown keys are rejected so typos cannot silently fall back to defaults.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);

struct ExperimentSpec {
    std::vector<PolicyKind> policies{PolicyKind::None, PolicyKind::Autopilot, PolicyKind::Rss,
                                     PolicyKind::Sff};
    std::vector<AggressionLevel> levels{AggressionLevel::No, AggressionLevel::Low,
                                        AggressionLevel::Intermediate, AggressionLevel::High};
    int iterations = 10;
    std::uint64_t base_seed = 1;
    ScenarioConfig scenario;

    void validate() const;
};

ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentSpec& spec);
ExperimentSpec load_experiment(const std::string& path);

// Parses a JSON file; cannot-read is an I/O error, bad JSON a validation one.
nlohmann::json load_json_file(const std::string& path);

}  // namespace sff
