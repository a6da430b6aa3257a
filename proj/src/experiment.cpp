#include "sff/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <omp.h>

#include "sff/errors.hpp"

namespace sff {

bool ResultsTable::has_errors() const {
    return std::any_of(cells.begin(), cells.end(),
                       [](const CellResult& c) { return !c.error.empty(); });
}

std::vector<std::string> ResultsTable::errors() const {
    std::vector<std::string> out;
    for (const CellResult& c : cells)
        if (!c.error.empty())
            out.push_back(aggression_name(c.level) + "/" + policy_name(c.policy) + "/iteration " +
                          std::to_string(c.iteration) + ": " + c.error);
    return out;
}

std::string ResultsTable::raw_csv() const {
    std::string out = "aggression,policy,iteration,arrivals,accident_free_steps\n";
    for (const CellResult& c : cells) {
        if (!c.error.empty()) continue;
        out += aggression_name(c.level);
        out += ',';
        out += policy_name(c.policy);
        out += ',';
        out += std::to_string(c.iteration);
        out += ',';
        out += std::to_string(c.episode.arrivals);
        out += ',';
        out += std::to_string(c.episode.accident_free_steps);
        out += '\n';
    }
    return out;
}

std::string ResultsTable::summary_csv() const {
    std::string out = "aggression,policy,mean_arrivals,mean_accident_free_steps\n";
    for (AggressionLevel level : spec.levels) {
        for (PolicyKind policy : spec.policies) {
            double arrivals = 0.0, safe_steps = 0.0;
            int n = 0;
            for (const CellResult& c : cells) {
                if (c.level != level || c.policy != policy || !c.error.empty()) continue;
                arrivals += c.episode.arrivals;
                safe_steps += c.episode.accident_free_steps;
                ++n;
            }
            if (n == 0) continue;
            char row[160];
            std::snprintf(row, sizeof(row), "%s,%s,%.9f,%.9f\n", aggression_name(level).c_str(),
                          policy_name(policy).c_str(), arrivals / n, safe_steps / n);
            out += row;
        }
    }
    return out;
}

ResultsTable run_experiment(const ExperimentSpec& spec, int jobs, bool progress) {
    spec.validate();
    ResultsTable table;
    table.spec = spec;
    const int levels = static_cast<int>(spec.levels.size());
    const int policies = static_cast<int>(spec.policies.size());
    const int total = levels * policies * spec.iterations;
    table.cells.resize(static_cast<std::size_t>(total));
    const int threads = std::max(1, jobs);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int idx = 0; idx < total; ++idx) {
        const int li = idx / (policies * spec.iterations);
        const int pi = (idx / spec.iterations) % policies;
        const int it = idx % spec.iterations;
        CellResult cell;
        cell.level = spec.levels[static_cast<std::size_t>(li)];
        cell.policy = spec.policies[static_cast<std::size_t>(pi)];
        cell.iteration = it;
        cell.seed = spec.base_seed + static_cast<std::uint64_t>(it);
        ScenarioConfig cfg = spec.scenario;
        cfg.policy = cell.policy;
        cfg.aggression = cell.level;
        cfg.seed = cell.seed;
        cfg.log_path.clear();
        try {
            cell.episode = run_episode(cfg);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        if (progress) {
#pragma omp critical(experiment_progress)
            std::fprintf(stderr, "cell %s/%s/%d done: arrivals=%d safe_steps=%d%s%s\n",
                         aggression_name(cell.level).c_str(), policy_name(cell.policy).c_str(),
                         it, cell.episode.arrivals, cell.episode.accident_free_steps,
                         cell.error.empty() ? "" : " error: ", cell.error.c_str());
        }
        table.cells[static_cast<std::size_t>(idx)] = std::move(cell);
    }
    return table;
}

void write_results(const ResultsTable& table, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    const auto write = [&](const std::string& name, const std::string& content) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open '" + path + "'");
        out << content;
        if (!out) throw IoError("failed writing '" + path + "'");
    };
    write("spec.json", experiment_to_json(table.spec).dump(2) + "\n");
    write("results.csv", table.raw_csv());
    write("summary.csv", table.summary_csv());
}

}  // namespace sff
