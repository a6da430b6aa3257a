#include "sff/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sff/dataset.hpp"
#include "sff/errors.hpp"
#include "sff/experiment.hpp"
#include "sff/render.hpp"

namespace sff {

namespace {

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("SFF_SEED");
    if (!raw || !*raw) return std::nullopt;
    std::uint64_t value = 0;
    const char* end = raw + std::string_view(raw).size();
    const auto [ptr, ec] = std::from_chars(raw, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ValidationError("SFF_SEED must be an unsigned integer, got '" + std::string(raw) +
                              "'");
    return value;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path + "'");
}

// Verification suites behind the verify-sff subcommand: the non-increase
// theorem on random two-vehicle encounters, and the force against an
// independent five-point stencil of the potential.
struct VerifyOutcome {
    int trials = 0;
    int nonincrease_violations = 0;
    double max_uptick = 0.0;
    int gradient_failures = 0;
    double worst_gradient_err = 0.0;

    bool ok() const { return nonincrease_violations == 0 && gradient_failures == 0; }
};

double potential_displaced(const WorldState& base, const FieldParams& fp, int axis, double d) {
    WorldState w = base;
    (axis == 0 ? w.actors[0].state.position.x : w.actors[0].state.position.y) += d;
    return pair_potential(w, w.actors[0].state.id, w.actors[1].state.id, fp);
}

VerifyOutcome run_verify(int trials, std::uint64_t seed) {
    const FieldParams fp = FieldParams::defaults();
    VerifyOutcome outcome;
    outcome.trials = trials;
    const Rng root(seed);

    Rng nonincrease_rng = root.derive("nonincrease");
    for (int t = 0; t < trials; ++t) {
        const WorldState world = random_pair_world(nonincrease_rng);
        const NonIncreaseReport report =
            verify_nonincrease(world, world.actors[0].state.id, world.actors[1].state.id, fp);
        outcome.nonincrease_violations += static_cast<int>(report.violations.size());
        outcome.max_uptick = std::max(outcome.max_uptick, report.max_uptick);
    }

    Rng gradient_rng = root.derive("gradient");
    for (int t = 0; t < trials; ++t) {
        // Rejection-sample an actually overlapping encounter so the check is
        // not vacuous.
        WorldState world = random_pair_world(gradient_rng, 20.0);
        double rho = 0.0;
        for (int attempt = 0; attempt < 100; ++attempt) {
            rho = pair_potential(world, world.actors[0].state.id, world.actors[1].state.id, fp);
            if (rho > 1e-9) break;
            world = random_pair_world(gradient_rng, 20.0);
        }
        if (rho <= 1e-9) continue;
        const Vec2 force =
            safety_force(world, world.actors[0].state.id, world.actors[1].state.id, fp);
        const double h = fp.fd_step;
        for (int axis = 0; axis < 2; ++axis) {
            const double p2 = potential_displaced(world, fp, axis, 2.0 * h);
            const double p1 = potential_displaced(world, fp, axis, h);
            const double m1 = potential_displaced(world, fp, axis, -h);
            const double m2 = potential_displaced(world, fp, axis, -2.0 * h);
            const double stencil = -(-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
            const double got = axis == 0 ? force.x : force.y;
            const double abs_err = std::abs(got - stencil);
            const double rel_err = abs_err / std::max(std::abs(stencil), 1e-12);
            if (abs_err > 1e-6 && rel_err > 0.10) ++outcome.gradient_failures;
            if (abs_err > 1e-6)
                outcome.worst_gradient_err = std::max(outcome.worst_gradient_err, rel_err);
        }
    }
    return outcome;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& policy, const std::string& aggression,
                 const std::string& log_path) {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_scenario(config_path);
    if (!policy.empty()) cfg.policy = policy_from_name(policy);
    if (!aggression.empty()) cfg.aggression = aggression_from_name(aggression);
    if (!log_path.empty()) cfg.log_path = log_path;
    if (seed) cfg.seed = *seed;
    if (const auto env = env_seed()) cfg.seed = *env;
    const EpisodeResult result = run_episode(cfg);
    std::cout << result.to_json().dump(2) << "\n";
    return 0;
}

int cmd_experiment(const std::string& spec_path, const std::string& out_dir, int jobs,
                   bool paper_scale, bool progress) {
    ExperimentSpec spec = spec_path.empty() ? ExperimentSpec{} : load_experiment(spec_path);
    if (paper_scale) {
        spec.iterations = 50;
        spec.scenario.steps = 5000;
        spec.scenario.npc_count = 50;
    }
    if (const auto env = env_seed()) spec.base_seed = *env;
    const ResultsTable table = run_experiment(spec, jobs, progress);
    write_results(table, out_dir);
    if (table.has_errors()) {
        for (const std::string& e : table.errors()) std::cerr << "error: " << e << "\n";
        return 1;
    }
    std::cout << table.summary_csv();
    return 0;
}

int cmd_train(int episodes, std::uint64_t seed, const std::string& out_model,
              const std::string& out_dataset, const std::string& log_csv) {
    if (const auto env = env_seed()) seed = *env;
    DatasetOptions options;
    options.episodes = episodes;
    const Dataset data = generate_dataset(options, seed);
    if (!out_dataset.empty()) data.save(out_dataset);
    TrainLog log;
    const PredictorModel model = train(data, TrainHyper{}, &log);
    model.save(out_model);
    if (!log_csv.empty()) log.to_csv(log_csv);
    nlohmann::json summary{{"examples", data.examples.size()},
                           {"train_examples", data.train_idx.size()},
                           {"val_examples", data.val_idx.size()},
                           {"best_epoch", log.best_epoch},
                           {"best_val_loss", log.best_val},
                           {"baseline_val_loss", log.baseline_val},
                           {"model", out_model}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& dataset_path) {
    const PredictorModel model = PredictorModel::load(model_path);
    const Dataset data = Dataset::load(dataset_path);
    const IouMetrics metrics = evaluate_iou(model, data, default_procedure());
    nlohmann::json summary{{"examples", metrics.per_example.size()},
                           {"mean_iou", metrics.mean},
                           {"p10_iou", metrics.p10}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_verify(int trials, std::uint64_t seed) {
    if (const auto env = env_seed()) seed = *env;
    const VerifyOutcome outcome = run_verify(trials, seed);
    nlohmann::json summary{
        {"trials", outcome.trials},
        {"nonincrease", {{"violations", outcome.nonincrease_violations},
                         {"max_uptick", outcome.max_uptick}}},
        {"gradient", {{"failures", outcome.gradient_failures},
                      {"worst_rel_err", outcome.worst_gradient_err}}},
        {"ok", outcome.ok()}};
    std::cout << summary.dump(2) << "\n";
    return outcome.ok() ? 0 : 1;
}

int cmd_render(const std::string& snapshot_path, const std::vector<std::string>& field_paths,
               const std::string& out_path, double scale) {
    const WorldState world = WorldState::from_json(load_json_file(snapshot_path));
    std::vector<SmoothField> fields;
    fields.reserve(field_paths.size());
    for (const std::string& p : field_paths) fields.push_back(SmoothField::load_pgm(p));
    RenderOptions opt;
    opt.scale = scale;
    write_text_file(out_path, render_svg(world, fields, opt));
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Safety force field traffic simulation toolkit"};
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Run one episode, print the result as JSON");
    std::string sim_config, sim_policy, sim_aggression, sim_log;
    std::uint64_t sim_seed = 0;
    simulate->add_option("--config", sim_config, "Scenario config JSON");
    auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "Episode seed");
    simulate->add_option("--policy", sim_policy, "none|autopilot|rss|sff");
    simulate->add_option("--aggression", sim_aggression, "no|low|intermediate|high");
    simulate->add_option("--log", sim_log, "JSONL decision log path");

    auto* experiment = app.add_subcommand("experiment", "Run the policy x aggression grid");
    std::string exp_spec, exp_out;
    int exp_jobs = 1;
    bool exp_paper = false, exp_progress = false;
    experiment->add_option("--spec", exp_spec, "Experiment spec JSON");
    experiment->add_option("--out-dir", exp_out, "Output directory")->required();
    experiment->add_option("--jobs", exp_jobs, "Concurrent episodes");
    experiment->add_flag("--paper-scale", exp_paper, "50 iterations x 5000 steps x 50 vehicles");
    experiment->add_flag("--progress", exp_progress, "Report finished cells on stderr");

    auto* train_cmd = app.add_subcommand("train-predictor",
                                         "Generate a dataset and train the claimed-set predictor");
    int train_episodes = 10;
    std::uint64_t train_seed = 1;
    std::string train_out, train_dataset, train_log;
    train_cmd->add_option("--episodes", train_episodes, "Traffic episodes to sample");
    train_cmd->add_option("--seed", train_seed, "Dataset seed");
    train_cmd->add_option("--out-model", train_out, "Checkpoint path")->required();
    train_cmd->add_option("--out-dataset", train_dataset, "Also save the dataset here");
    train_cmd->add_option("--log-csv", train_log, "Training log CSV path");

    auto* eval_cmd = app.add_subcommand("eval-predictor", "Claimed-set IoU on a saved dataset");
    std::string eval_model, eval_dataset;
    eval_cmd->add_option("--model", eval_model, "Checkpoint path")->required();
    eval_cmd->add_option("--dataset", eval_dataset, "Dataset path")->required();

    auto* verify = app.add_subcommand("verify-sff",
                                      "Non-increase and force-gradient verification suites");
    int verify_trials = 200;
    std::uint64_t verify_seed = 1;
    verify->add_option("--trials", verify_trials, "Trials per suite");
    verify->add_option("--seed", verify_seed, "Suite seed");

    auto* render = app.add_subcommand("render", "Render a world snapshot to SVG");
    std::string render_snapshot, render_out;
    std::vector<std::string> render_fields;
    double render_scale = 4.0;
    render->add_option("--snapshot", render_snapshot, "World snapshot JSON")->required();
    render->add_option("--fields", render_fields, "Field dumps (PGM), comma separated")
        ->delimiter(',');
    render->add_option("--out", render_out, "SVG output path")->required();
    render->add_option("--scale", render_scale, "Pixels per meter");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(simulate))
            return cmd_simulate(sim_config,
                                sim_seed_opt->count() ? std::optional<std::uint64_t>(sim_seed)
                                                      : std::nullopt,
                                sim_policy, sim_aggression, sim_log);
        if (app.got_subcommand(experiment))
            return cmd_experiment(exp_spec, exp_out, exp_jobs, exp_paper, exp_progress);
        if (app.got_subcommand(train_cmd))
            return cmd_train(train_episodes, train_seed, train_out, train_dataset, train_log);
        if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_model, eval_dataset);
        if (app.got_subcommand(verify)) return cmd_verify(verify_trials, verify_seed);
        if (app.got_subcommand(render))
            return cmd_render(render_snapshot, render_fields, render_out, render_scale);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sff
