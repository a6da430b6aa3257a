#pragma once

#include <string>
#include <vector>

#include "sff/config.hpp"

namespace sff {

struct CellResult {
    AggressionLevel level = AggressionLevel::No;
    PolicyKind policy = PolicyKind::None;
    int iteration = 0;
    std::uint64_t seed = 0;
    EpisodeResult episode;
    std::string error; // non-empty if the episode threw
};

struct ResultsTable {
    ExperimentSpec spec;
    std::vector<CellResult> cells; // aggression-major, then policy, then iteration

    bool has_errors() const;
    std::vector<std::string> errors() const;
    std::string raw_csv() const;     // aggression,policy,iteration,arrivals,accident_free_steps
    std::string summary_csv() const; // means per (aggression, policy)
};

// Runs every (aggression, policy, iteration) cell; iteration i uses seed
// base_seed + i so rows are paired across policies and levels. Cells run
// concurrently up to `jobs`; each episode stays single-threaded inside.
ResultsTable run_experiment(const ExperimentSpec& spec, int jobs = 1, bool progress = false);

// Writes spec.json, results.csv and summary.csv into out_dir (created if
// missing).
void write_results(const ResultsTable& table, const std::string& out_dir);

}  // namespace sff
