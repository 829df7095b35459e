#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "autoopt/commands.hpp"

namespace {

autoopt::ExperimentConfig load(const std::string& config_path, std::uint64_t seed_override,
                               bool has_seed, const std::string& out_override, int jobs,
                               bool desk_scale) {
    autoopt::ExperimentConfig cfg = config_path.empty()
                                        ? autoopt::load_config_text("{}")
                                        : autoopt::load_config_file(config_path);
    if (has_seed) cfg.master_seed = seed_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (jobs > 0) cfg.jobs = jobs;
    if (desk_scale) autoopt::apply_desk_scale(cfg);
    cfg.config_hash = autoopt::hash_config(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"autoopt: automated design of metaheuristic optimization algorithms"};
    app.require_subcommand(1);

    std::string config_path, out_dir, graph_path;
    std::uint64_t seed = 0;
    bool has_seed = false, desk_scale = false;
    int jobs = 0;

    const auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            has_seed = true;
        });
        cmd->add_option("--out", out_dir, "output directory override");
        cmd->add_option("--jobs", jobs, "worker threads for independent runs");
        cmd->add_flag("--desk-scale", desk_scale, "apply the reduced-budget preset");
    };

    auto* design = app.add_subcommand("design", "search for an algorithm on the configured problems");
    add_common(design, true);

    auto* compare = app.add_subcommand("compare", "run algorithms side by side, emit a results table");
    add_common(compare, true);

    auto* surrogate = app.add_subcommand("surrogate", "train embedding + surrogate, report Kendall tau");
    add_common(surrogate, true);

    auto* validate = app.add_subcommand("validate", "check a serialized graph against the design space");
    validate->add_option("graph", graph_path, "graph file")->required();

    auto* run_cmd = app.add_subcommand("run", "run one graph on the first configured problem");
    add_common(run_cmd, true);
    run_cmd->add_option("--graph", graph_path, "graph file")->required();
    int run_population = 20;
    long long run_budget = 5000;
    run_cmd->add_option("--population", run_population, "population size");
    run_cmd->add_option("--budget", run_budget, "function evaluation budget");

    auto* catalog = app.add_subcommand("catalog", "dump the operator catalogs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(design)) {
            autoopt::cli::cmd_design(load(config_path, seed, has_seed, out_dir, jobs, desk_scale));
        } else if (app.got_subcommand(compare)) {
            autoopt::cli::cmd_compare(load(config_path, seed, has_seed, out_dir, jobs, desk_scale));
        } else if (app.got_subcommand(surrogate)) {
            autoopt::cli::cmd_surrogate(load(config_path, seed, has_seed, out_dir, jobs, desk_scale));
        } else if (app.got_subcommand(validate)) {
            return autoopt::cli::cmd_validate(graph_path) ? 0 : 1;
        } else if (app.got_subcommand(run_cmd)) {
            const auto cfg = load(config_path, seed, has_seed, out_dir, jobs, desk_scale);
            const auto problems = autoopt::problems_from_config(cfg);
            const auto result = autoopt::cli::cmd_run(graph_path, problems.front(), cfg.master_seed,
                                             run_population, run_budget);
            std::cout << result.dump(2) << "\n";
        } else if (app.got_subcommand(catalog)) {
            autoopt::cli::cmd_catalog(std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
