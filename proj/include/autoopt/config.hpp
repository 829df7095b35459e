#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoopt/beamforming.hpp"
#include "autoopt/design.hpp"
#include "autoopt/problem.hpp"

namespace autoopt {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DesignSection {
    int runs_per_instance = 10;
    int candidate_budget = 5000;
    int candidates_per_iteration = 10;
    int population_size = 20;
    long long budget_fe = 5000;
    int max_pathway_ops = 6;
    int max_pathways = 2;
    std::string surrogate = "none";        // none | prescreen | pure
    std::string surrogate_space = "embedding";  // embedding | raw
    double prescreen_fraction = 0.3;
    int surrogate_training_size = 100;  // labeled graphs for the design-time estimator
    int stagnation_restart = 5;
    int perturb_strength = 3;
};

struct CompareSection {
    std::vector<std::string> algorithms;  // baseline names or graph:<path>
    int runs = 30;
    long long budget_fe = 20000;
    int population_size = 50;
    bool per_run_dump = false;
};

struct SurrogateSection {
    int training_size = 1000;
    int holdout_size = 100;
    int latent_dim = 20;
    int hidden_dim = 32;
    int epochs = 200;
    double learning_rate = 0.01;
    double attr_weight = 0.1;
    int n_trees = 100;
    int max_depth = 12;
    long long label_budget_fe = 1000;
    int label_population = 20;
    int label_runs = 1;
    int tau_seeds = 1;  // averaged tau over this many seed offsets
};

struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    json problem_specs = json::array();
    DesignSection design;
    CompareSection compare;
    SurrogateSection surrogate;
    int jobs = 1;
    std::uint64_t config_hash = 0;  // over the effective config
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config section '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace detail

// Builds one Problem from its config object. Continuous benchmarks take
// {id, dimension, seed}; beamforming instances are either generated from
// sizes or imported from a channels file.
inline Problem problem_from_json(const json& spec) {
    detail::reject_unknown_keys(spec,
                                {"id", "dimension", "seed", "users", "antennas", "elements",
                                 "bits", "transmit_power", "noise", "channels_file", "value"},
                                "problems[]");
    if (!spec.contains("id")) throw ConfigError("problem entry needs an 'id'");
    const std::string id = spec.at("id").get<std::string>();
    if (id == "constant") {
        // flat objective, useful as a deterministic stub
        int dimension = 2;
        double value = 0.0;
        detail::read_field(spec, "dimension", dimension);
        detail::read_field(spec, "value", value);
        return Problem::custom("constant", Kind::continuous, dimension, 0.0, 1.0, {},
                               [value](const Eigen::VectorXd&) { return value; });
    }
    if (id == "beamform") {
        if (spec.contains("channels_file"))
            return beamform_problem(load_beamform_file(spec.at("channels_file").get<std::string>()));
        int users = 2, antennas = 4, elements = 8, bits = 1;
        double transmit_power = 1.0, noise = 0.1;
        std::uint64_t seed = 0;
        detail::read_field(spec, "users", users);
        detail::read_field(spec, "antennas", antennas);
        detail::read_field(spec, "elements", elements);
        detail::read_field(spec, "bits", bits);
        detail::read_field(spec, "transmit_power", transmit_power);
        detail::read_field(spec, "noise", noise);
        detail::read_field(spec, "seed", seed);
        return beamform_problem(
            make_beamform(users, antennas, elements, bits, transmit_power, noise, seed));
    }
    int dimension = 10;
    std::uint64_t seed = 1;
    detail::read_field(spec, "dimension", dimension);
    detail::read_field(spec, "seed", seed);
    try {
        return Problem::benchmark(id, dimension, seed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

inline std::vector<Problem> problems_from_config(const ExperimentConfig& cfg) {
    std::vector<Problem> out;
    for (const auto& spec : cfg.problem_specs) out.push_back(problem_from_json(spec));
    if (out.empty()) throw ConfigError("config lists no problems");
    return out;
}

inline ExperimentConfig parse_config(const json& root) {
    detail::reject_unknown_keys(
        root, {"master_seed", "output_dir", "problems", "design", "compare", "surrogate", "jobs"},
        "config");
    ExperimentConfig cfg;
    detail::read_field(root, "master_seed", cfg.master_seed);
    detail::read_field(root, "output_dir", cfg.output_dir);
    detail::read_field(root, "jobs", cfg.jobs);
    if (root.contains("problems")) {
        if (!root.at("problems").is_array()) throw ConfigError("'problems' must be an array");
        cfg.problem_specs = root.at("problems");
        for (const auto& p : cfg.problem_specs) problem_from_json(p);  // validate early
    }
    if (root.contains("design")) {
        const auto& d = root.at("design");
        detail::reject_unknown_keys(
            d,
            {"runs_per_instance", "candidate_budget", "candidates_per_iteration",
             "population_size", "budget_fe", "max_pathway_ops", "max_pathways", "surrogate",
             "surrogate_space", "prescreen_fraction", "surrogate_training_size",
             "stagnation_restart", "perturb_strength"},
            "design");
        detail::read_field(d, "runs_per_instance", cfg.design.runs_per_instance);
        detail::read_field(d, "candidate_budget", cfg.design.candidate_budget);
        detail::read_field(d, "candidates_per_iteration", cfg.design.candidates_per_iteration);
        detail::read_field(d, "population_size", cfg.design.population_size);
        detail::read_field(d, "budget_fe", cfg.design.budget_fe);
        detail::read_field(d, "max_pathway_ops", cfg.design.max_pathway_ops);
        detail::read_field(d, "max_pathways", cfg.design.max_pathways);
        detail::read_field(d, "surrogate", cfg.design.surrogate);
        detail::read_field(d, "surrogate_space", cfg.design.surrogate_space);
        detail::read_field(d, "prescreen_fraction", cfg.design.prescreen_fraction);
        detail::read_field(d, "surrogate_training_size", cfg.design.surrogate_training_size);
        detail::read_field(d, "stagnation_restart", cfg.design.stagnation_restart);
        detail::read_field(d, "perturb_strength", cfg.design.perturb_strength);
        surrogate_use_from_string(cfg.design.surrogate);  // validate
        if (cfg.design.surrogate_space != "embedding" && cfg.design.surrogate_space != "raw")
            throw ConfigError("design.surrogate_space must be 'embedding' or 'raw'");
    }
    if (root.contains("compare")) {
        const auto& c = root.at("compare");
        detail::reject_unknown_keys(
            c, {"algorithms", "runs", "budget_fe", "population_size", "per_run_dump"}, "compare");
        detail::read_field(c, "algorithms", cfg.compare.algorithms);
        detail::read_field(c, "runs", cfg.compare.runs);
        detail::read_field(c, "budget_fe", cfg.compare.budget_fe);
        detail::read_field(c, "population_size", cfg.compare.population_size);
        detail::read_field(c, "per_run_dump", cfg.compare.per_run_dump);
    }
    if (root.contains("surrogate")) {
        const auto& s = root.at("surrogate");
        detail::reject_unknown_keys(
            s,
            {"training_size", "holdout_size", "latent_dim", "hidden_dim", "epochs",
             "learning_rate", "attr_weight", "n_trees", "max_depth", "label_budget_fe",
             "label_population", "label_runs", "tau_seeds"},
            "surrogate");
        detail::read_field(s, "training_size", cfg.surrogate.training_size);
        detail::read_field(s, "holdout_size", cfg.surrogate.holdout_size);
        detail::read_field(s, "latent_dim", cfg.surrogate.latent_dim);
        detail::read_field(s, "hidden_dim", cfg.surrogate.hidden_dim);
        detail::read_field(s, "epochs", cfg.surrogate.epochs);
        detail::read_field(s, "learning_rate", cfg.surrogate.learning_rate);
        detail::read_field(s, "attr_weight", cfg.surrogate.attr_weight);
        detail::read_field(s, "n_trees", cfg.surrogate.n_trees);
        detail::read_field(s, "max_depth", cfg.surrogate.max_depth);
        detail::read_field(s, "label_budget_fe", cfg.surrogate.label_budget_fe);
        detail::read_field(s, "label_population", cfg.surrogate.label_population);
        detail::read_field(s, "label_runs", cfg.surrogate.label_runs);
        detail::read_field(s, "tau_seeds", cfg.surrogate.tau_seeds);
    }
    return cfg;
}

// Reduced-budget preset for quick desk runs; applied after parsing.
inline void apply_desk_scale(ExperimentConfig& cfg) {
    cfg.design.candidate_budget = std::min(cfg.design.candidate_budget, 60);
    cfg.design.runs_per_instance = std::min(cfg.design.runs_per_instance, 3);
    cfg.design.budget_fe = std::min<long long>(cfg.design.budget_fe, 600);
    cfg.design.population_size = std::min(cfg.design.population_size, 20);
    cfg.compare.runs = std::min(cfg.compare.runs, 5);
    cfg.compare.budget_fe = std::min<long long>(cfg.compare.budget_fe, 4000);
    cfg.compare.population_size = std::min(cfg.compare.population_size, 20);
    cfg.surrogate.training_size = std::min(cfg.surrogate.training_size, 60);
    cfg.surrogate.holdout_size = std::min(cfg.surrogate.holdout_size, 30);
    cfg.surrogate.epochs = std::min(cfg.surrogate.epochs, 60);
    cfg.surrogate.label_budget_fe = std::min<long long>(cfg.surrogate.label_budget_fe, 400);
}

// Hash over the effective experiment parameters; every output file carries
// it. The output directory and worker count do not change results, so they
// stay out of the hash.
inline std::uint64_t hash_config(const ExperimentConfig& cfg) {
    json effective;
    effective["master_seed"] = cfg.master_seed;
    effective["problems"] = cfg.problem_specs;
    effective["design"] = {{"runs_per_instance", cfg.design.runs_per_instance},
                           {"candidate_budget", cfg.design.candidate_budget},
                           {"candidates_per_iteration", cfg.design.candidates_per_iteration},
                           {"population_size", cfg.design.population_size},
                           {"budget_fe", cfg.design.budget_fe},
                           {"max_pathway_ops", cfg.design.max_pathway_ops},
                           {"max_pathways", cfg.design.max_pathways},
                           {"surrogate", cfg.design.surrogate},
                           {"surrogate_space", cfg.design.surrogate_space},
                           {"prescreen_fraction", cfg.design.prescreen_fraction},
                           {"surrogate_training_size", cfg.design.surrogate_training_size},
                           {"stagnation_restart", cfg.design.stagnation_restart},
                           {"perturb_strength", cfg.design.perturb_strength}};
    effective["compare"] = {{"algorithms", cfg.compare.algorithms},
                            {"runs", cfg.compare.runs},
                            {"budget_fe", cfg.compare.budget_fe},
                            {"population_size", cfg.compare.population_size},
                            {"per_run_dump", cfg.compare.per_run_dump}};
    effective["surrogate"] = {{"training_size", cfg.surrogate.training_size},
                              {"holdout_size", cfg.surrogate.holdout_size},
                              {"latent_dim", cfg.surrogate.latent_dim},
                              {"hidden_dim", cfg.surrogate.hidden_dim},
                              {"epochs", cfg.surrogate.epochs},
                              {"learning_rate", cfg.surrogate.learning_rate},
                              {"attr_weight", cfg.surrogate.attr_weight},
                              {"n_trees", cfg.surrogate.n_trees},
                              {"max_depth", cfg.surrogate.max_depth},
                              {"label_budget_fe", cfg.surrogate.label_budget_fe},
                              {"label_population", cfg.surrogate.label_population},
                              {"label_runs", cfg.surrogate.label_runs},
                              {"tau_seeds", cfg.surrogate.tau_seeds}};
    return fnv1a64(effective.dump());
}

inline ExperimentConfig load_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports the byte offset; surface the line number instead
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
    }
    ExperimentConfig cfg = parse_config(root);
    cfg.config_hash = hash_config(cfg);
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return load_config_text(buf.str());
}

} // namespace autoopt
