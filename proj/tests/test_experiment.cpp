#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "sff/errors.hpp"
#include "sff/experiment.hpp"

using namespace sff;

namespace {

ExperimentSpec tiny_spec() {
    ExperimentSpec spec;
    spec.policies = {PolicyKind::None, PolicyKind::Sff};
    spec.levels = {AggressionLevel::No};
    spec.iterations = 2;
    spec.base_seed = 11;
    spec.scenario.rows = 2;
    spec.scenario.cols = 2;
    spec.scenario.npc_count = 3;
    spec.scenario.steps = 50;
    return spec;
}

// split one CSV body into its non-header rows
std::vector<std::string> rows_of(const std::string& csv) {
    std::vector<std::string> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(line);
    return rows;
}

}  // namespace

TEST_CASE("a tiny grid runs every cell with paired seeds") {
    const ExperimentSpec spec = tiny_spec();
    const ResultsTable table = run_experiment(spec);
    REQUIRE(table.cells.size() == 4);  // 1 level x 2 policies x 2 iterations
    CHECK(!table.has_errors());
    CHECK(table.errors().empty());

    for (const CellResult& c : table.cells) {
        CHECK(c.seed == spec.base_seed + static_cast<std::uint64_t>(c.iteration));
        CHECK(c.episode.episode_steps > 0);
        CHECK(c.episode.episode_steps <= spec.scenario.steps);
    }
    // aggression-major, then policy, then iteration
    CHECK(table.cells[0].policy == PolicyKind::None);
    CHECK(table.cells[0].iteration == 0);
    CHECK(table.cells[1].policy == PolicyKind::None);
    CHECK(table.cells[1].iteration == 1);
    CHECK(table.cells[2].policy == PolicyKind::Sff);
    CHECK(table.cells[2].iteration == 0);
}

TEST_CASE("the raw table pins its header and one row per cell") {
    const ResultsTable table = run_experiment(tiny_spec());
    const std::string csv = table.raw_csv();
    CHECK(csv.rfind("aggression,policy,iteration,arrivals,accident_free_steps\n", 0) == 0);

    const std::vector<std::string> rows = rows_of(csv);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("no,none,0,", 0) == 0);
    CHECK(rows[1].rfind("no,none,1,", 0) == 0);
    CHECK(rows[2].rfind("no,sff,0,", 0) == 0);
    CHECK(rows[3].rfind("no,sff,1,", 0) == 0);
}

TEST_CASE("summary means equal the recomputed raw means") {
    const ResultsTable table = run_experiment(tiny_spec());
    const std::string summary = table.summary_csv();
    CHECK(summary.rfind("aggression,policy,mean_arrivals,mean_accident_free_steps\n", 0) == 0);

    const std::vector<std::string> rows = rows_of(summary);
    REQUIRE(rows.size() == 2);  // one per (level, policy)

    for (PolicyKind policy : table.spec.policies) {
        double arrivals = 0.0, safe = 0.0;
        int n = 0;
        for (const CellResult& c : table.cells) {
            if (c.policy != policy) continue;
            arrivals += c.episode.arrivals;
            safe += c.episode.accident_free_steps;
            ++n;
        }
        char expect[160];
        std::snprintf(expect, sizeof(expect), "no,%s,%.9f,%.9f",
                      policy_name(policy).c_str(), arrivals / n, safe / n);
        bool found = false;
        for (const std::string& row : rows) found = found || row == expect;
        CHECK(found);
    }
}

TEST_CASE("identical specs produce byte-identical tables") {
    const std::string raw1 = run_experiment(tiny_spec()).raw_csv();
    const std::string raw2 = run_experiment(tiny_spec()).raw_csv();
    CHECK(raw1 == raw2);

    const std::string sum1 = run_experiment(tiny_spec()).summary_csv();
    const std::string sum2 = run_experiment(tiny_spec()).summary_csv();
    CHECK(sum1 == sum2);
}

TEST_CASE("the job count never changes the results") {
    const ResultsTable serial = run_experiment(tiny_spec(), 1);
    const ResultsTable parallel = run_experiment(tiny_spec(), 2);
    CHECK(serial.raw_csv() == parallel.raw_csv());
    CHECK(serial.summary_csv() == parallel.summary_csv());
}

TEST_CASE("a failing cell is recorded without sinking the rest") {
    ExperimentSpec spec = tiny_spec();
    spec.scenario.source = ClaimedSetSource::Model;
    spec.scenario.model_path = "does-not-exist.json";  // every episode throws on load
    const ResultsTable table = run_experiment(spec);
    REQUIRE(table.cells.size() == 4);
    CHECK(table.has_errors());
    CHECK(table.errors().size() == 4);
    CHECK(table.errors()[0].find("no/") != std::string::npos);
    // failed cells drop out of both tables
    CHECK(rows_of(table.raw_csv()).empty());
    CHECK(rows_of(table.summary_csv()).empty());
}

TEST_CASE("result directories are created, filled and overwritten") {
    const std::string dir = testutil::test_dir("exp_out") + "/nested/run1";
    const ResultsTable table = run_experiment(tiny_spec());
    write_results(table, dir);

    namespace fs = std::filesystem;
    REQUIRE(fs::exists(dir + "/spec.json"));
    REQUIRE(fs::exists(dir + "/results.csv"));
    REQUIRE(fs::exists(dir + "/summary.csv"));
    CHECK(testutil::read_file(dir + "/results.csv") == table.raw_csv());
    CHECK(testutil::read_file(dir + "/summary.csv") == table.summary_csv());

    // the stored spec parses back to the same experiment
    const ExperimentSpec back = load_experiment(dir + "/spec.json");
    CHECK(experiment_to_json(back).dump() == experiment_to_json(table.spec).dump());

    // a second write lands on the same files
    write_results(table, dir);
    CHECK(testutil::read_file(dir + "/results.csv") == table.raw_csv());

    // a plain file where the directory should go is an I/O failure
    const std::string blocked = testutil::test_dir("exp_blocked");
    testutil::write_file(blocked + "/occupied", "x");
    CHECK_THROWS_AS(write_results(table, blocked + "/occupied"), IoError);
}
