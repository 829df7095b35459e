#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoopt/catalog.hpp"
#include "autoopt/graph.hpp"
#include "autoopt/graph_moves.hpp"
#include "autoopt/operators.hpp"
#include "autoopt/problem.hpp"
#include "autoopt/rng.hpp"

namespace autoopt {

struct RunConfig {
    int population_size = 20;
    long long budget_fe = 5000;
    std::uint64_t seed = 0;
    bool record_trace = false;
};

struct TraceEvent {
    int iteration = 0;
    int vertex = -1;
    long long evaluations = 0;
    double best = std::numeric_limits<double>::quiet_NaN();  // best of the current population
};

struct RunResult {
    double best_fitness = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd best_solution;
    std::vector<double> history;  // best of S after initialization and each outer iteration
    long long evaluations_used = 0;
    std::vector<TraceEvent> trace;
    std::map<int, SolutionSet> archives;  // keyed by archive vertex id
};

// Archive operators are not part of the shipped catalog; callers inject them
// by op_id. The hook receives the archive set (starts empty) and the current
// population after an update.
using ArchiveFn = std::function<void(SolutionSet&, const SolutionSet&, Rng&)>;

struct ExecutionHooks {
    std::map<std::string, ArchiveFn> archive_ops;
};

namespace detail {

class Execution {
public:
    Execution(const AlgorithmGraph& graph, const Problem& problem, const RunConfig& config,
              const ExecutionHooks& hooks)
        : graph_(graph),
          problem_(problem),
          config_(config),
          hooks_(hooks),
          catalog_(Catalog::for_kind(problem.kind())),
          rng_(derive_seed(config.seed, fnv1a64("run"))) {
        if (config.population_size < 1) throw std::invalid_argument("population_size must be >= 1");
        if (config.budget_fe < config.population_size)
            throw std::invalid_argument("budget_fe must cover the initial population");

        const auto report =
            validate(graph, catalog_, {std::numeric_limits<int>::max()});
        if (!report.valid())
            throw std::invalid_argument("cannot run invalid graph:\n" + report.summary());
        chains_ = pathway_chains(graph);
        for (const auto& chain : chains_)
            for (int id : chain.archives) {
                const auto* v = graph.find(id);
                if (!hooks_.archive_ops.count(v->op_id))
                    throw std::invalid_argument("no archive hook registered for operator '" +
                                                v->op_id + "'");
                archives_[id] = SolutionSet(0, problem.dimension());
            }
        budget_.limit = config.budget_fe;
    }

    RunResult run() {
        population_ = sample_uniform(problem_, config_.population_size, rng_);
        budget_.used += evaluate(problem_, population_);
        RunResult result;
        result.history.push_back(current_best());

        int iteration = 0;
        while (budget_.used < budget_.limit) {
            run_iteration(iteration, result);
            result.history.push_back(current_best());
            ++iteration;
        }

        result.evaluations_used = budget_.used;
        finalize_best(result);
        result.archives = std::move(archives_);
        return result;
    }

private:
    struct Slice {
        int begin = 0;
        int end = 0;
    };

    Slice slice_for(int pathway) const {
        const int n = population_.size();
        if (!graph_.parallel()) return {0, n};
        const int q = graph_.pathway_count();
        return {pathway * n / q, (pathway + 1) * n / q};
    }

    double current_best() const {
        const int idx = population_.best_index();
        return idx < 0 ? std::numeric_limits<double>::quiet_NaN() : population_.fitness[idx];
    }

    void record(RunResult& result, int iteration, int vertex) {
        if (config_.record_trace)
            result.trace.push_back({iteration, vertex, budget_.used, current_best()});
    }

    bool condition_met(const ConditionSpec& c, int passes, long long pass_fe, int stale) const {
        switch (c.kind) {
            case ConditionKind::always: return passes >= 1;
            case ConditionKind::budget_consumed: return pass_fe >= c.threshold;
            case ConditionKind::stagnation: return stale >= c.threshold;
            case ConditionKind::local_optimum: return stale >= 1;
        }
        return true;
    }

    void run_iteration(int iteration, RunResult& result) {
        for (std::size_t j = 0; j < chains_.size(); ++j) {
            const auto& chain = chains_[j];
            int passes = 0, stale = 0;
            long long pass_fe = 0;
            while (budget_.used < budget_.limit &&
                   !condition_met(chain.condition, passes, pass_fe, stale)) {
                const double before = current_best();
                pass_fe += run_pass(chain, static_cast<int>(j), iteration, result);
                ++passes;
                const double after = current_best();
                stale = after < before ? 0 : stale + 1;
            }
        }
    }

    // one choose -> search... -> update traversal; returns evaluations charged
    long long run_pass(const PathwayChain& chain, int pathway, int iteration, RunResult& result) {
        const Slice slice = slice_for(pathway);
        std::vector<std::size_t> rows;
        for (int r = slice.begin; r < slice.end; ++r) rows.push_back(static_cast<std::size_t>(r));
        SolutionSet current = graph_.parallel() ? population_.pick(rows) : population_;

        const auto fire = [&](int vertex_id) { record(result, iteration, vertex_id); };

        // choose
        {
            const auto* v = graph_.find(chain.choose);
            OperatorIO io;
            io.population = std::move(current);
            io.params = v->params;
            io.rng = &rng_;
            io.problem = &problem_;
            io.state_key = state_key(v->id);
            current = apply(catalog_.entry(v->op_id), io);
            fire(v->id);
        }
        SolutionSet base = graph_.parallel() ? population_.pick(rows) : population_;

        // searches
        for (int sid : chain.searches) {
            const auto* v = graph_.find(sid);
            OperatorIO io;
            io.population = std::move(current);
            io.params = v->params;
            io.rng = &rng_;
            io.problem = &problem_;
            io.state_key = state_key(v->id);
            current = apply(catalog_.entry(v->op_id), io);
            fire(v->id);
        }

        // offspring are evaluated right before the update consumes them
        const long long charged = evaluate(problem_, current);
        budget_.used += charged;

        {
            const auto* v = graph_.find(chain.update);
            OperatorIO io;
            io.population = std::move(base);
            io.offspring = std::move(current);
            io.params = v->params;
            io.rng = &rng_;
            io.problem = &problem_;
            io.state_key = state_key(v->id);
            SolutionSet updated = apply(catalog_.entry(v->op_id), io);
            if (graph_.parallel())
                write_slice(slice, updated);
            else
                population_ = std::move(updated);
            fire(v->id);
        }

        for (int aid : chain.archives) {
            const auto* v = graph_.find(aid);
            hooks_.archive_ops.at(v->op_id)(archives_[aid], population_, rng_);
            fire(aid);
        }
        return charged;
    }

    std::string state_key(int vertex_id) const {
        return "v" + std::to_string(vertex_id) + "/";
    }

    void write_slice(const Slice& slice, const SolutionSet& updated) {
        for (int i = 0; i < updated.size(); ++i) {
            const int r = slice.begin + i;
            population_.decisions.row(r) = updated.decisions.row(i);
            population_.fitness[r] = updated.fitness[i];
            population_.evaluated[static_cast<std::size_t>(r)] =
                updated.evaluated[static_cast<std::size_t>(i)];
        }
        for (const auto& [key, mat] : updated.row_aux) {
            auto it = population_.row_aux.find(key);
            if (it == population_.row_aux.end())
                it = population_.row_aux
                         .emplace(key, Eigen::MatrixXd::Zero(population_.size(), mat.cols()))
                         .first;
            for (int i = 0; i < updated.size(); ++i) it->second.row(slice.begin + i) = mat.row(i);
        }
        for (const auto& [key, mat] : updated.shared_aux) population_.shared_aux[key] = mat;
    }

    void finalize_best(RunResult& result) {
        int best = population_.best_index();
        const SolutionSet* owner = &population_;
        for (const auto& [id, archive] : archives_) {
            const int a = archive.best_index();
            if (a >= 0 && (best < 0 || archive.fitness[a] < owner->fitness[best])) {
                best = a;
                owner = &archive;
            }
        }
        if (best >= 0) {
            result.best_fitness = owner->fitness[best];
            result.best_solution = owner->decisions.row(best);
        }
    }

    const AlgorithmGraph& graph_;
    const Problem& problem_;
    RunConfig config_;
    ExecutionHooks hooks_;
    const Catalog& catalog_;
    Rng rng_;
    std::vector<PathwayChain> chains_;
    SolutionSet population_;
    EvalBudget budget_;
    std::map<int, SolutionSet> archives_;
};

} // namespace detail

inline RunResult run(const AlgorithmGraph& graph, const Problem& problem, const RunConfig& config,
                     const ExecutionHooks& hooks = {}) {
    return detail::Execution(graph, problem, config, hooks).run();
}

// Full firing trace; consuming it reproduces run()'s outcome exactly.
inline std::vector<TraceEvent> step_trace(const AlgorithmGraph& graph, const Problem& problem,
                                          RunConfig config, const ExecutionHooks& hooks = {}) {
    config.record_trace = true;
    return detail::Execution(graph, problem, config, hooks).run().trace;
}

// ---------------------------------------------------------------------------
// named structure templates
// ---------------------------------------------------------------------------

enum class StructureTemplate {
    serial,
    variable_neighborhood,
    iterated_local_search,
    memetic,
    parallel_ensemble,
};

inline StructureTemplate structure_template_from_string(const std::string& s) {
    if (s == "serial") return StructureTemplate::serial;
    if (s == "variable_neighborhood") return StructureTemplate::variable_neighborhood;
    if (s == "iterated_local_search") return StructureTemplate::iterated_local_search;
    if (s == "memetic") return StructureTemplate::memetic;
    if (s == "parallel_ensemble") return StructureTemplate::parallel_ensemble;
    throw std::invalid_argument("unknown structure template: " + s);
}

namespace detail {

inline moves::SlotSpec default_slot(const Catalog& catalog, const std::string& op_id,
                                    Role expected) {
    const auto& entry = catalog.entry(op_id);
    if (entry.role != expected)
        throw std::invalid_argument("template slot needs a " + std::string(to_string(expected)) +
                                    " operator, got '" + op_id + "'");
    return {entry.op_id, entry.default_params()};
}

} // namespace detail

// Builds the canonical graph for one of the named algorithm structures.
//   serial:                ops = {choose, search..., update}
//   variable_neighborhood: ops = {search_1, ..., search_q}, q >= 2
//   iterated_local_search: ops = {local_search, global_search}
//   memetic:               ops = {global_search, local_search}
//   parallel_ensemble:     ops = {search_1, ..., search_q}, q >= 2
inline AlgorithmGraph instantiate_structure(StructureTemplate t,
                                            const std::vector<std::string>& op_ids,
                                            const Catalog& catalog) {
    using moves::GraphSpecForm;
    using moves::PathwaySpec;
    const auto slot = [&](const std::string& id, Role role) {
        return detail::default_slot(catalog, id, role);
    };

    GraphSpecForm form;
    switch (t) {
        case StructureTemplate::serial: {
            if (op_ids.size() < 3)
                throw std::invalid_argument("serial template needs choose, search..., update");
            PathwaySpec p;
            p.choose = slot(op_ids.front(), Role::choose);
            for (std::size_t i = 1; i + 1 < op_ids.size(); ++i)
                p.searches.push_back(slot(op_ids[i], Role::search));
            p.update = slot(op_ids.back(), Role::update);
            form.pathways.push_back(std::move(p));
            form.metadata["origin"] = "template:serial";
            break;
        }
        case StructureTemplate::variable_neighborhood: {
            if (op_ids.size() < 2)
                throw std::invalid_argument("variable_neighborhood needs >= 2 search operators");
            for (const auto& id : op_ids) {
                PathwaySpec p;
                p.choose = slot("choose_traverse", Role::choose);
                p.searches.push_back(slot(id, Role::search));
                p.update = slot("update_greedy", Role::update);
                p.condition = {ConditionKind::local_optimum, 1};
                form.pathways.push_back(std::move(p));
            }
            form.metadata["origin"] = "template:variable_neighborhood";
            break;
        }
        case StructureTemplate::iterated_local_search: {
            if (op_ids.size() != 2)
                throw std::invalid_argument("iterated_local_search needs {local, global} searches");
            PathwaySpec local;
            local.choose = slot("choose_traverse", Role::choose);
            local.searches.push_back(slot(op_ids[0], Role::search));
            local.update = slot("update_greedy", Role::update);
            local.condition = {ConditionKind::local_optimum, 1};
            PathwaySpec global;
            global.choose = slot("choose_traverse", Role::choose);
            global.searches.push_back(slot(op_ids[1], Role::search));
            global.update = slot("update_always", Role::update);
            global.condition = {ConditionKind::budget_consumed, 1};  // one pass per round
            form.pathways.push_back(std::move(local));
            form.pathways.push_back(std::move(global));
            form.metadata["origin"] = "template:iterated_local_search";
            break;
        }
        case StructureTemplate::memetic: {
            if (op_ids.size() != 2)
                throw std::invalid_argument("memetic needs {global, local} searches");
            PathwaySpec global;
            global.choose = slot("choose_traverse", Role::choose);
            global.searches.push_back(slot(op_ids[0], Role::search));
            global.update = slot("update_pairwise", Role::update);
            PathwaySpec local;
            local.choose = slot("choose_traverse", Role::choose);
            local.searches.push_back(slot(op_ids[1], Role::search));
            local.update = slot("update_greedy", Role::update);
            local.condition = {ConditionKind::local_optimum, 1};
            form.pathways.push_back(std::move(global));
            form.pathways.push_back(std::move(local));
            form.metadata["origin"] = "template:memetic";
            break;
        }
        case StructureTemplate::parallel_ensemble: {
            if (op_ids.size() < 2)
                throw std::invalid_argument("parallel_ensemble needs >= 2 search operators");
            form.parallel = true;
            for (const auto& id : op_ids) {
                PathwaySpec p;
                p.choose = slot("choose_traverse", Role::choose);
                p.searches.push_back(slot(id, Role::search));
                p.update = slot("update_greedy", Role::update);
                form.pathways.push_back(std::move(p));
            }
            form.metadata["origin"] = "template:parallel_ensemble";
            break;
        }
    }
    return moves::rebuild(form);
}

} // namespace autoopt
