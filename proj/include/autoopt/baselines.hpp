#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "autoopt/beamforming.hpp"
#include "autoopt/executor.hpp"
#include "autoopt/graph.hpp"
#include "autoopt/rng.hpp"

namespace autoopt {

struct BaselineSpec {
    std::string name;
    AlgorithmGraph graph;
};

inline std::vector<std::string> baseline_names() {
    return {"GA", "ILS", "SA", "DE", "PSO", "EDA", "CMA-ES", "random_search"};
}

// Fixed comparison algorithms expressed as graphs in the same runtime.
// DE is current/1 with F=0.5, CR=0.9; GA pairs one-point crossover with a
// random-reset style mutation; ILS and SA search with the one-dimensional
// reset (its closest continuous analogue is a low-rate uniform mutation);
// PSO uses the canonical constriction-era defaults.
inline BaselineSpec baseline(const std::string& name, Kind kind) {
    using moves::GraphSpecForm;
    using moves::PathwaySpec;
    const auto& catalog = Catalog::for_kind(kind);
    const bool discrete = kind == Kind::discrete;

    const auto slot = [&](const std::string& op_id, std::vector<double> params = {}) {
        const auto& entry = catalog.entry(op_id);
        moves::SlotSpec s{entry.op_id, params.empty() ? entry.default_params() : std::move(params)};
        if (s.params.size() != entry.params.size())
            throw std::logic_error("baseline param count mismatch for " + op_id);
        return s;
    };
    const auto require_continuous = [&] {
        if (discrete)
            throw std::invalid_argument("baseline '" + name + "' is not defined for discrete problems");
    };

    GraphSpecForm form;
    form.metadata["origin"] = "baseline:" + name;

    if (name == "GA") {
        PathwaySpec p;
        p.choose = slot("choose_tournament", {2});
        p.searches.push_back(slot("cross_point_one", {0.9}));
        p.searches.push_back(discrete ? slot("search_reset_rand", {0.1})
                                      : slot("search_mu_uniform", {0.1}));
        p.update = slot("update_pairwise");
        form.pathways.push_back(std::move(p));
    } else if (name == "DE") {
        require_continuous();
        PathwaySpec p;
        p.choose = slot("choose_traverse");
        p.searches.push_back(slot("search_de_current", {0.5, 0.9}));
        p.update = slot("update_pairwise");
        form.pathways.push_back(std::move(p));
    } else if (name == "PSO") {
        require_continuous();
        PathwaySpec p;
        p.choose = slot("choose_traverse");
        p.searches.push_back(slot("search_pso", {0.7298, 1.4962, 1.4962}));
        p.update = slot("update_always");
        form.pathways.push_back(std::move(p));
    } else if (name == "EDA") {
        require_continuous();
        PathwaySpec p;
        p.choose = slot("choose_traverse");
        p.searches.push_back(slot("search_eda", {0.5}));
        p.update = slot("update_greedy");
        form.pathways.push_back(std::move(p));
    } else if (name == "CMA-ES" || name == "CMAES") {
        require_continuous();
        PathwaySpec p;
        p.choose = slot("choose_traverse");
        p.searches.push_back(slot("search_cma", {0.3}));
        p.update = slot("update_greedy");
        form.pathways.push_back(std::move(p));
    } else if (name == "SA") {
        PathwaySpec p;
        p.choose = slot("choose_traverse");
        p.searches.push_back(discrete ? slot("search_reset_one")
                                      : slot("search_mu_uniform", {0.1}));
        p.update = slot("update_simulated_annealing", {1.0, 0.99});
        form.pathways.push_back(std::move(p));
    } else if (name == "ILS") {
        PathwaySpec local;
        local.choose = slot("choose_traverse");
        local.searches.push_back(discrete ? slot("search_reset_one")
                                          : slot("search_mu_uniform", {0.1}));
        local.update = slot("update_greedy");
        local.condition = {ConditionKind::local_optimum, 1};
        PathwaySpec kick;
        kick.choose = slot("choose_traverse");
        kick.searches.push_back(discrete ? slot("search_reset_rand", {0.2})
                                         : slot("search_mu_uniform", {0.3}));
        kick.update = slot("update_pairwise");
        kick.condition = {ConditionKind::budget_consumed, 1};
        form.pathways.push_back(std::move(local));
        form.pathways.push_back(std::move(kick));
    } else if (name == "random_search") {
        PathwaySpec p;
        p.choose = slot("choose_traverse");
        p.searches.push_back(discrete ? slot("reinit_discrete") : slot("reinit_continuous"));
        p.update = slot("update_greedy");
        form.pathways.push_back(std::move(p));
    } else {
        throw std::invalid_argument("unknown baseline: " + name);
    }

    return {name, moves::rebuild(form)};
}

// One coordinate sweep: enumerate each element's phase levels in turn while
// holding the others fixed, starting from a random configuration.
inline std::pair<Eigen::VectorXd, double> sequential_beamform(const BeamformInstance& inst,
                                                              Rng& rng) {
    const int n = inst.num_elements, levels = inst.phase_levels();
    Eigen::VectorXd phases(n);
    for (int i = 0; i < n; ++i) phases[i] = static_cast<double>(rng.integer(0, levels - 1));
    double best = beamform_fitness(inst, phases);
    for (int i = 0; i < n; ++i) {
        double best_level = phases[i];
        for (int v = 0; v < levels; ++v) {
            phases[i] = v;
            const double f = beamform_fitness(inst, phases);
            if (f < best) {
                best = f;
                best_level = v;
            }
        }
        phases[i] = best_level;
    }
    return {phases, best};
}

// Best of `samples` uniformly drawn configurations.
inline std::pair<Eigen::VectorXd, double> random_beamform(const BeamformInstance& inst, int samples,
                                                          Rng& rng) {
    if (samples < 1) throw std::invalid_argument("random_beamform needs samples >= 1");
    const int n = inst.num_elements, levels = inst.phase_levels();
    Eigen::VectorXd best_phases;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd phases(n);
        for (int i = 0; i < n; ++i) phases[i] = static_cast<double>(rng.integer(0, levels - 1));
        const double f = beamform_fitness(inst, phases);
        if (f < best) {
            best = f;
            best_phases = phases;
        }
    }
    return {best_phases, best};
}

} // namespace autoopt
