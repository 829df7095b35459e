#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "autoopt/baselines.hpp"
#include "autoopt/config.hpp"
#include "autoopt/csv.hpp"
#include "autoopt/design.hpp"
#include "autoopt/graph_io.hpp"
#include "autoopt/surrogate.hpp"

namespace autoopt::cli {

namespace fs = std::filesystem;

// Declared outputs are deleted when a command fails part-way.
class OutputSet {
public:
    explicit OutputSet(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }
    std::string path(const std::string& name) {
        const std::string p = (fs::path(dir_) / name).string();
        declared_.push_back(p);
        return p;
    }
    void discard_all() {
        for (const auto& p : declared_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::string dir_;
    std::vector<std::string> declared_;
};

inline std::string hash_string(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Random split of the configured instances into design and test sets. Three
// instances follow the 2-train/1-test scheme; larger sets split in half.
struct InstanceSplit {
    std::vector<int> train;
    std::vector<int> test;
};

inline InstanceSplit split_instances(int count, std::uint64_t seed) {
    InstanceSplit split;
    if (count == 1) {
        split.train = {0};
        split.test = {0};
        return split;
    }
    std::vector<int> order(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(seed, fnv1a64("instance-split")));
    rng.shuffle(order);
    const int train_count = count == 3 ? 2 : std::max(1, count / 2);
    split.train.assign(order.begin(), order.begin() + train_count);
    split.test.assign(order.begin() + train_count, order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

inline DesignTask make_design_task(const ExperimentConfig& cfg, std::vector<Problem> instances) {
    DesignTask task;
    task.instances = std::move(instances);
    task.runs_per_instance = cfg.design.runs_per_instance;
    task.candidate_budget = cfg.design.candidate_budget;
    task.candidates_per_iteration = cfg.design.candidates_per_iteration;
    task.run_config.population_size = cfg.design.population_size;
    task.run_config.budget_fe = cfg.design.budget_fe;
    task.seed = cfg.master_seed;
    task.graph_config.max_pathway_ops = cfg.design.max_pathway_ops;
    task.graph_config.max_pathways = cfg.design.max_pathways;
    task.stagnation_restart = cfg.design.stagnation_restart;
    task.perturb_strength = cfg.design.perturb_strength;
    task.jobs = cfg.jobs;
    task.surrogate_use = surrogate_use_from_string(cfg.design.surrogate);
    return task;
}

// Labels `count` distinct random graphs with exact evaluation on the task and
// returns them with their encodings.
inline std::vector<TrainingSample> label_random_graphs(const DesignTask& task,
                                                       const Catalog& catalog, int count,
                                                       std::uint64_t seed,
                                                       std::vector<AlgorithmGraph>* graphs_out =
                                                           nullptr) {
    Rng rng(derive_seed(seed, fnv1a64("surrogate-samples")));
    std::vector<TrainingSample> samples;
    std::set<std::uint64_t> seen;
    int guard = 0;
    while (static_cast<int>(samples.size()) < count) {
        AlgorithmGraph g = random_graph(catalog, rng, task.graph_config);
        const std::uint64_t id = graph_hash(g);
        if (!seen.insert(id).second) {
            if (++guard > 64 * count) throw std::runtime_error("could not sample distinct graphs");
            continue;
        }
        TrainingSample s;
        s.encoding = encode(g, catalog);
        s.label = evaluate_full(g, task).mean_fitness();
        s.graph_id = id;
        samples.push_back(std::move(s));
        if (graphs_out) graphs_out->push_back(std::move(g));
    }
    return samples;
}

// Design-time performance estimator over embedding or raw space.
inline std::function<double(const AlgorithmGraph&)> build_design_estimator(
    const DesignTask& task, const Catalog& catalog, const ExperimentConfig& cfg) {
    const auto samples = label_random_graphs(task, catalog, cfg.design.surrogate_training_size,
                                             derive_seed(cfg.master_seed, fnv1a64("design-est")));
    ForestConfig forest;
    forest.n_trees = cfg.surrogate.n_trees;
    forest.max_depth = cfg.surrogate.max_depth;
    forest.seed = derive_seed(cfg.master_seed, fnv1a64("design-forest"));

    auto model = std::make_shared<SurrogateModel>();
    if (cfg.design.surrogate_space == "embedding") {
        VgaeConfig vc;
        vc.latent_dim = cfg.surrogate.latent_dim;
        vc.hidden_dim = cfg.surrogate.hidden_dim;
        vc.epochs = cfg.surrogate.epochs;
        vc.learning_rate = cfg.surrogate.learning_rate;
        vc.attr_weight = cfg.surrogate.attr_weight;
        vc.seed = derive_seed(cfg.master_seed, fnv1a64("design-vgae"));
        std::vector<VgaeInput> inputs;
        inputs.reserve(samples.size());
        for (const auto& s : samples) inputs.push_back(encoding_to_input(s.encoding, catalog));
        const VGAEModel vgae = vgae_train(inputs, vc);
        *model = surrogate_train(samples, &vgae, SurrogateSpace::embedding, catalog, forest);
    } else {
        *model = surrogate_train(samples, nullptr, SurrogateSpace::raw, catalog, forest);
    }
    const Catalog* cat = &catalog;
    return [model, cat](const AlgorithmGraph& g) { return model->predict(encode(g, *cat), *cat); };
}

struct DesignArtifacts {
    std::string best_graph_path;
    std::string trace_path;
    std::string holdout_path;
    AlgorithmGraph best;
    DesignState state;
};

inline DesignArtifacts cmd_design(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    OutputSet outputs(cfg.output_dir);
    DesignArtifacts art;
    art.best_graph_path = outputs.path("best_graph.txt");
    art.trace_path = outputs.path("design_trace.csv");
    art.holdout_path = outputs.path("holdout_eval.csv");
    try {
        const auto problems = problems_from_config(cfg);
        const auto split = split_instances(static_cast<int>(problems.size()), cfg.master_seed);

        std::vector<Problem> train;
        for (int i : split.train) train.push_back(problems[static_cast<std::size_t>(i)]);
        const Kind kind = train.front().kind();
        const auto& catalog = Catalog::for_kind(kind);

        DesignTask task = make_design_task(cfg, train);
        if (task.surrogate_use != SurrogateUse::none) {
            log << "training design-time surrogate (" << cfg.design.surrogate_space << " space, "
                << cfg.design.surrogate_training_size << " labeled graphs)\n";
            task.estimator = build_design_estimator(task, catalog, cfg);
        }

        log << "designing on " << train.size() << " instance(s), budget "
            << task.candidate_budget << " candidates\n";
        auto [best, state] = design(task, catalog);
        best.metadata["config_hash"] = hash_string(cfg.config_hash);
        best.metadata["master_seed"] = std::to_string(cfg.master_seed);
        save_graph_file(best, art.best_graph_path);

        CsvWriter trace({"candidate", "accepted", "challenger_mean", "best_ever_mean"});
        trace.annotate("config_hash", hash_string(cfg.config_hash));
        trace.annotate("master_seed", std::to_string(cfg.master_seed));
        for (const auto& row : state.trace)
            trace.add_row({std::to_string(row.candidate_index), row.accepted ? "1" : "0",
                           CsvWriter::format(row.challenger_mean),
                           CsvWriter::format(row.best_ever_mean)});
        trace.write_file(art.trace_path);

        CsvWriter holdout({"instance", "run", "fitness"});
        holdout.annotate("config_hash", hash_string(cfg.config_hash));
        holdout.annotate("master_seed", std::to_string(cfg.master_seed));
        for (int t : split.test) {
            const auto& problem = problems[static_cast<std::size_t>(t)];
            for (int r = 0; r < task.runs_per_instance; ++r) {
                RunConfig rc = task.run_config;
                rc.seed = derive_seed(cfg.master_seed, fnv1a64("holdout"),
                                      static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(r));
                const auto result = run(best, problem, rc);
                holdout.add_row({problem.id(), std::to_string(r),
                                 CsvWriter::format(result.best_fitness)});
            }
        }
        holdout.write_file(art.holdout_path);

        art.best = best;
        art.state = std::move(state);
        log << "design done: best mean " << art.state.best_ever.mean_fitness() << ", wrote "
            << art.best_graph_path << "\n";
        return art;
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

inline AlgorithmGraph resolve_algorithm(const std::string& name, Kind kind) {
    if (name.rfind("graph:", 0) == 0) return load_graph_file(name.substr(6));
    return baseline(name, kind).graph;
}

inline std::string cmd_compare(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    OutputSet outputs(cfg.output_dir);
    const std::string table_path = outputs.path("compare.csv");
    const std::string runs_path =
        cfg.compare.per_run_dump ? outputs.path("compare_runs.csv") : std::string();
    try {
        if (cfg.compare.algorithms.empty())
            throw ConfigError("compare.algorithms lists no algorithms");
        const auto problems = problems_from_config(cfg);

        CsvWriter table({"problem", "algorithm", "mean", "std", "runs"});
        table.annotate("config_hash", hash_string(cfg.config_hash));
        table.annotate("master_seed", std::to_string(cfg.master_seed));
        CsvWriter run_rows({"problem", "algorithm", "run", "fitness"});
        run_rows.annotate("config_hash", hash_string(cfg.config_hash));

        for (std::size_t pi = 0; pi < problems.size(); ++pi) {
            const auto& problem = problems[pi];
            for (std::size_t ai = 0; ai < cfg.compare.algorithms.size(); ++ai) {
                const auto& name = cfg.compare.algorithms[ai];
                const AlgorithmGraph graph = resolve_algorithm(name, problem.kind());
                std::vector<double> fitness(static_cast<std::size_t>(cfg.compare.runs));
                parallel_for(cfg.compare.runs, cfg.jobs, [&](int r) {
                    RunConfig rc;
                    rc.population_size = cfg.compare.population_size;
                    rc.budget_fe = cfg.compare.budget_fe;
                    rc.seed = derive_seed(cfg.master_seed, fnv1a64("compare"),
                                          static_cast<std::uint64_t>(pi),
                                          static_cast<std::uint64_t>(ai),
                                          static_cast<std::uint64_t>(r));
                    fitness[static_cast<std::size_t>(r)] = run(graph, problem, rc).best_fitness;
                });
                double mean = 0.0;
                for (double f : fitness) mean += f;
                mean /= static_cast<double>(fitness.size());
                double var = 0.0;
                for (double f : fitness) var += (f - mean) * (f - mean);
                const double stddev =
                    fitness.size() > 1 ? std::sqrt(var / static_cast<double>(fitness.size() - 1))
                                       : 0.0;
                table.add_row({problem.id(), name, CsvWriter::format(mean),
                               CsvWriter::format(stddev), std::to_string(cfg.compare.runs)});
                if (cfg.compare.per_run_dump)
                    for (std::size_t r = 0; r < fitness.size(); ++r)
                        run_rows.add_row({problem.id(), name, std::to_string(r),
                                          CsvWriter::format(fitness[r])});
                log << problem.id() << " / " << name << ": " << mean << " +- " << stddev << "\n";
            }
        }
        table.write_file(table_path);
        if (cfg.compare.per_run_dump) run_rows.write_file(runs_path);
        return table_path;
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

struct SurrogateOutcome {
    double tau_embed = 0.0;
    double tau_raw = 0.0;
};

// One surrogate experiment on one problem set: label graphs, train VGAE + both
// forests, report tau on the disjoint holdout.
inline SurrogateOutcome surrogate_experiment(const ExperimentConfig& cfg,
                                             const std::vector<Problem>& instances,
                                             std::uint64_t seed) {
    const Kind kind = instances.front().kind();
    const auto& catalog = Catalog::for_kind(kind);

    DesignTask label_task;
    label_task.instances = instances;
    label_task.runs_per_instance = cfg.surrogate.label_runs;
    label_task.run_config.population_size = cfg.surrogate.label_population;
    label_task.run_config.budget_fe = cfg.surrogate.label_budget_fe;
    label_task.seed = seed;
    label_task.jobs = cfg.jobs;
    label_task.graph_config.max_pathway_ops = cfg.design.max_pathway_ops;
    label_task.graph_config.max_pathways = cfg.design.max_pathways;

    const int total = cfg.surrogate.training_size + cfg.surrogate.holdout_size;
    auto samples = label_random_graphs(label_task, catalog, total,
                                       derive_seed(seed, fnv1a64("surrogate-cmd")));
    std::vector<TrainingSample> train(samples.begin(),
                                      samples.begin() + cfg.surrogate.training_size);
    std::vector<TrainingSample> holdout(samples.begin() + cfg.surrogate.training_size,
                                        samples.end());

    VgaeConfig vc;
    vc.latent_dim = cfg.surrogate.latent_dim;
    vc.hidden_dim = cfg.surrogate.hidden_dim;
    vc.epochs = cfg.surrogate.epochs;
    vc.learning_rate = cfg.surrogate.learning_rate;
    vc.attr_weight = cfg.surrogate.attr_weight;
    vc.seed = derive_seed(seed, fnv1a64("surrogate-vgae"));
    std::vector<VgaeInput> inputs;
    inputs.reserve(train.size());
    for (const auto& s : train) inputs.push_back(encoding_to_input(s.encoding, catalog));
    const VGAEModel vgae = vgae_train(inputs, vc);

    ForestConfig forest;
    forest.n_trees = cfg.surrogate.n_trees;
    forest.max_depth = cfg.surrogate.max_depth;
    forest.seed = derive_seed(seed, fnv1a64("surrogate-forest"));

    const auto embed_model =
        surrogate_train(train, &vgae, SurrogateSpace::embedding, catalog, forest);
    const auto raw_model = surrogate_train(train, nullptr, SurrogateSpace::raw, catalog, forest);

    SurrogateOutcome out;
    out.tau_embed = accuracy_report(embed_model, holdout, catalog).tau;
    out.tau_raw = accuracy_report(raw_model, holdout, catalog).tau;
    return out;
}

inline std::string cmd_surrogate(const ExperimentConfig& cfg, std::ostream& log = std::cout) {
    OutputSet outputs(cfg.output_dir);
    const std::string report_path = outputs.path("surrogate_report.csv");
    try {
        const auto problems = problems_from_config(cfg);
        CsvWriter report({"problem", "space", "seed", "tau", "n_train", "n_holdout"});
        report.annotate("config_hash", hash_string(cfg.config_hash));
        report.annotate("master_seed", std::to_string(cfg.master_seed));

        for (const auto& problem : problems) {
            double sum_embed = 0.0, sum_raw = 0.0;
            for (int s = 0; s < cfg.surrogate.tau_seeds; ++s) {
                const auto outcome = surrogate_experiment(
                    cfg, {problem},
                    derive_seed(cfg.master_seed, static_cast<std::uint64_t>(s)));
                sum_embed += outcome.tau_embed;
                sum_raw += outcome.tau_raw;
                report.add_row({problem.id(), "RF_embed", std::to_string(s),
                                CsvWriter::format(outcome.tau_embed),
                                std::to_string(cfg.surrogate.training_size),
                                std::to_string(cfg.surrogate.holdout_size)});
                report.add_row({problem.id(), "RF_no_embed", std::to_string(s),
                                CsvWriter::format(outcome.tau_raw),
                                std::to_string(cfg.surrogate.training_size),
                                std::to_string(cfg.surrogate.holdout_size)});
            }
            const double n = static_cast<double>(cfg.surrogate.tau_seeds);
            report.add_row({problem.id(), "RF_embed", "mean", CsvWriter::format(sum_embed / n),
                            std::to_string(cfg.surrogate.training_size),
                            std::to_string(cfg.surrogate.holdout_size)});
            report.add_row({problem.id(), "RF_no_embed", "mean", CsvWriter::format(sum_raw / n),
                            std::to_string(cfg.surrogate.training_size),
                            std::to_string(cfg.surrogate.holdout_size)});
            log << problem.id() << ": tau(RF_embed) " << sum_embed / n << ", tau(RF_no_embed) "
                << sum_raw / n << "\n";
        }
        report.write_file(report_path);
        return report_path;
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

inline bool cmd_validate(const std::string& graph_path, std::ostream& log = std::cout) {
    const AlgorithmGraph g = load_graph_file(graph_path);
    const auto continuous = validate(g, Catalog::for_kind(Kind::continuous));
    const auto discrete = validate(g, Catalog::for_kind(Kind::discrete));
    if (continuous.valid() || discrete.valid()) {
        log << "valid ("
            << (continuous.valid() && discrete.valid()
                    ? "continuous and discrete"
                    : continuous.valid() ? "continuous" : "discrete")
            << " design space)\n";
        return true;
    }
    log << "invalid\n-- against continuous catalog --\n"
        << continuous.summary() << "-- against discrete catalog --\n"
        << discrete.summary();
    return false;
}

inline json cmd_run(const std::string& graph_path, const Problem& problem, std::uint64_t seed,
                    int population_size, long long budget_fe) {
    const AlgorithmGraph g = load_graph_file(graph_path);
    RunConfig rc;
    rc.population_size = population_size;
    rc.budget_fe = budget_fe;
    rc.seed = seed;
    const RunResult result = run(g, problem, rc);
    json out;
    out["problem"] = problem.id();
    out["seed"] = seed;
    out["best_fitness"] = result.best_fitness;
    out["evaluations_used"] = result.evaluations_used;
    out["best_solution"] = std::vector<double>(result.best_solution.data(),
                                               result.best_solution.data() +
                                                   result.best_solution.size());
    out["history"] = result.history;
    return out;
}

inline void cmd_catalog(std::ostream& os) {
    Catalog::for_kind(Kind::continuous).dump(os);
    os << "\n";
    Catalog::for_kind(Kind::discrete).dump(os);
}

} // namespace autoopt::cli
