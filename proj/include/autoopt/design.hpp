#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "autoopt/executor.hpp"
#include "autoopt/graph_io.hpp"
#include "autoopt/graph_moves.hpp"
#include "autoopt/problem.hpp"

namespace autoopt {

// index-stable parallel map; with jobs <= 1 it degrades to a plain loop
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const int count = std::min(jobs, n);
    for (int t = 0; t < count; ++t)
        workers.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

enum class SurrogateUse { none, prescreen, pure };

inline SurrogateUse surrogate_use_from_string(const std::string& s) {
    if (s == "none") return SurrogateUse::none;
    if (s == "prescreen") return SurrogateUse::prescreen;
    if (s == "pure") return SurrogateUse::pure;
    throw std::invalid_argument("unknown surrogate mode: " + s);
}

struct DesignTask {
    std::vector<Problem> instances;  // T_design
    int runs_per_instance = 10;
    int candidate_budget = 5000;       // number of produced algorithms to evaluate
    int candidates_per_iteration = 10;
    RunConfig run_config;              // shared by every produced algorithm
    std::uint64_t seed = 0;
    GraphConfig graph_config;
    int stagnation_restart = 5;  // iterations without acceptance before a kick
    int perturb_strength = 3;
    int jobs = 1;

    SurrogateUse surrogate_use = SurrogateUse::none;
    std::function<double(const AlgorithmGraph&)> estimator;
    double prescreen_fraction = 0.3;
};

struct RunLedgerEntry {
    int instance = 0;
    int run = 0;
    double fitness = 0.0;
};

struct PerformanceRecord {
    AlgorithmGraph graph;
    std::vector<RunLedgerEntry> ledger;
    int runs_completed = 0;

    double mean_fitness() const {
        if (ledger.empty()) return std::numeric_limits<double>::quiet_NaN();
        double total = 0.0;
        for (const auto& e : ledger) total += e.fitness;
        return total / static_cast<double>(ledger.size());
    }
};

struct DesignTraceRow {
    int candidate_index = 0;
    bool accepted = false;
    double challenger_mean = 0.0;  // running mean at the rejection/acceptance point
    double best_ever_mean = 0.0;
};

struct DesignState {
    PerformanceRecord incumbent;
    PerformanceRecord best_ever;
    int candidates_evaluated = 0;
    std::vector<DesignTraceRow> trace;
};

namespace detail {

inline void check_task(const DesignTask& task) {
    if (task.instances.empty()) throw std::invalid_argument("design task has no instances");
    if (task.runs_per_instance < 1 || task.candidates_per_iteration < 1)
        throw std::invalid_argument("design task budgets must be >= 1");
    const Kind kind = task.instances.front().kind();
    for (const auto& p : task.instances)
        if (p.kind() != kind)
            throw std::invalid_argument("design task mixes continuous and discrete instances");
    if (task.surrogate_use != SurrogateUse::none && !task.estimator)
        throw std::invalid_argument("surrogate mode requires an estimator");
}

// evaluation blocks in round-robin instance order, so that partial ledgers of
// different algorithms always cover the same (instance, run) pairs
inline std::pair<int, int> block_of(const DesignTask& task, int b) {
    const int n = static_cast<int>(task.instances.size());
    return {b % n, b / n};
}

inline RunLedgerEntry run_block(const AlgorithmGraph& g, std::uint64_t graph_id,
                                const DesignTask& task, int b) {
    const auto [instance, run_index] = block_of(task, b);
    RunConfig cfg = task.run_config;
    cfg.seed = derive_seed(task.seed, graph_id, static_cast<std::uint64_t>(instance),
                           static_cast<std::uint64_t>(run_index));
    cfg.record_trace = false;
    const RunResult result = run(g, task.instances[static_cast<std::size_t>(instance)], cfg);
    return {instance, run_index, result.best_fitness};
}

inline double mean_of_first(const std::vector<RunLedgerEntry>& ledger, int count) {
    double total = 0.0;
    for (int i = 0; i < count; ++i) total += ledger[static_cast<std::size_t>(i)].fitness;
    return total / count;
}

} // namespace detail

// Every run of every produced algorithm on T_design: runs_per_instance runs
// per instance, seeds derived from (task seed, graph id, instance, run).
inline PerformanceRecord evaluate_full(const AlgorithmGraph& g, const DesignTask& task) {
    detail::check_task(task);
    PerformanceRecord rec;
    rec.graph = g;
    const std::uint64_t gid = graph_hash(g);
    const int total = task.runs_per_instance * static_cast<int>(task.instances.size());
    rec.ledger.resize(static_cast<std::size_t>(total));
    parallel_for(total, task.jobs, [&](int b) {
        rec.ledger[static_cast<std::size_t>(b)] = detail::run_block(g, gid, task, b);
    });
    rec.runs_completed = total;
    return rec;
}

struct CompareOutcome {
    bool accepted = false;
    PerformanceRecord challenger;
};

// Incremental 1,2,4,... run schedule: the challenger is dropped the first time
// its running mean trails the incumbent's mean over the same (instance, run)
// blocks, and accepted only with a strictly better full mean (ties keep the
// incumbent).
inline CompareOutcome intensify_compare(const AlgorithmGraph& challenger,
                                        const PerformanceRecord& incumbent,
                                        const DesignTask& task) {
    detail::check_task(task);
    if (incumbent.runs_completed < 1)
        throw std::invalid_argument("incumbent has no recorded runs");
    const int total = task.runs_per_instance * static_cast<int>(task.instances.size());
    if (incumbent.runs_completed != total ||
        static_cast<int>(incumbent.ledger.size()) != total)
        throw std::invalid_argument("incumbent record does not match the task's instance set");

    CompareOutcome out;
    out.challenger.graph = challenger;
    out.challenger.ledger.resize(static_cast<std::size_t>(total));
    const std::uint64_t gid = graph_hash(challenger);

    int done = 0, batch = 1;
    while (done < total) {
        const int take = std::min(batch, total - done);
        parallel_for(take, task.jobs, [&](int i) {
            out.challenger.ledger[static_cast<std::size_t>(done + i)] =
                detail::run_block(challenger, gid, task, done + i);
        });
        done += take;
        batch *= 2;
        const double challenger_mean = detail::mean_of_first(out.challenger.ledger, done);
        const double incumbent_mean = detail::mean_of_first(incumbent.ledger, done);
        if (challenger_mean > incumbent_mean) {
            out.challenger.ledger.resize(static_cast<std::size_t>(done));
            out.challenger.runs_completed = done;
            out.accepted = false;
            return out;
        }
    }
    out.challenger.runs_completed = total;
    out.accepted = out.challenger.mean_fitness() < incumbent.mean_fitness();
    return out;
}

// Iterated local search over the graph design space with intensification as
// the evaluation strategy. Returns the best graph found and the full state.
inline std::pair<AlgorithmGraph, DesignState> design(const DesignTask& task,
                                                     const Catalog& catalog) {
    detail::check_task(task);
    if (catalog.size() == 0) throw std::invalid_argument("empty catalog");
    if (catalog.kind() != task.instances.front().kind())
        throw std::invalid_argument("catalog kind does not match the task instances");

    Rng rng(derive_seed(task.seed, fnv1a64("design-engine")));
    DesignState state;

    AlgorithmGraph start = random_graph(catalog, rng, task.graph_config);
    start.metadata["origin"] = "design:initial";
    state.incumbent = evaluate_full(start, task);
    state.best_ever = state.incumbent;
    state.trace.push_back(
        {0, true, state.incumbent.mean_fitness(), state.best_ever.mean_fitness()});

    // pure-surrogate mode tracks estimates and evaluates exactly only at the end
    double incumbent_estimate = 0.0;
    if (task.surrogate_use == SurrogateUse::pure)
        incumbent_estimate = task.estimator(state.incumbent.graph);
    AlgorithmGraph best_est_graph = state.incumbent.graph;
    double best_estimate = incumbent_estimate;

    int stagnant = 0;
    while (state.candidates_evaluated < task.candidate_budget) {
        auto candidates = neighbors(state.incumbent.graph, catalog, rng, task.graph_config,
                                    task.candidates_per_iteration);

        bool any_accept = false;
        if (task.surrogate_use == SurrogateUse::pure) {
            for (const auto& cand : candidates) {
                if (state.candidates_evaluated >= task.candidate_budget) break;
                const double est = task.estimator(cand);
                ++state.candidates_evaluated;
                const bool accepted = est < incumbent_estimate;
                if (accepted) {
                    state.incumbent.graph = cand;
                    incumbent_estimate = est;
                    any_accept = true;
                    if (est < best_estimate) {
                        best_estimate = est;
                        best_est_graph = cand;
                    }
                }
                state.trace.push_back(
                    {state.candidates_evaluated, accepted, est, best_estimate});
            }
        } else {
            if (task.surrogate_use == SurrogateUse::prescreen) {
                std::stable_sort(candidates.begin(), candidates.end(),
                                 [&](const AlgorithmGraph& a, const AlgorithmGraph& b) {
                                     return task.estimator(a) < task.estimator(b);
                                 });
                const auto keep = std::max<std::size_t>(
                    1, static_cast<std::size_t>(
                           std::ceil(task.prescreen_fraction *
                                     static_cast<double>(candidates.size()))));
                candidates.resize(std::min(candidates.size(), keep));
            }
            for (const auto& cand : candidates) {
                if (state.candidates_evaluated >= task.candidate_budget) break;
                auto outcome = intensify_compare(cand, state.incumbent, task);
                ++state.candidates_evaluated;
                if (outcome.accepted) {
                    state.incumbent = outcome.challenger;
                    any_accept = true;
                    if (state.incumbent.mean_fitness() < state.best_ever.mean_fitness())
                        state.best_ever = state.incumbent;
                }
                state.trace.push_back({state.candidates_evaluated, outcome.accepted,
                                       outcome.challenger.mean_fitness(),
                                       state.best_ever.mean_fitness()});
            }
        }

        stagnant = any_accept ? 0 : stagnant + 1;
        if (stagnant >= task.stagnation_restart &&
            state.candidates_evaluated < task.candidate_budget) {
            AlgorithmGraph kicked = perturb(state.incumbent.graph, catalog, rng,
                                            task.perturb_strength, task.graph_config);
            kicked.metadata["origin"] = "design:perturbation";
            if (task.surrogate_use == SurrogateUse::pure) {
                incumbent_estimate = task.estimator(kicked);
                state.incumbent.graph = kicked;
                ++state.candidates_evaluated;
                state.trace.push_back(
                    {state.candidates_evaluated, true, incumbent_estimate, best_estimate});
            } else {
                state.incumbent = evaluate_full(kicked, task);
                ++state.candidates_evaluated;
                if (state.incumbent.mean_fitness() < state.best_ever.mean_fitness())
                    state.best_ever = state.incumbent;
                state.trace.push_back({state.candidates_evaluated, true,
                                       state.incumbent.mean_fitness(),
                                       state.best_ever.mean_fitness()});
            }
            stagnant = 0;
        }
    }

    if (task.surrogate_use == SurrogateUse::pure) {
        state.best_ever = evaluate_full(best_est_graph, task);
        state.incumbent = state.best_ever;
    }
    return {state.best_ever.graph, state};
}

} // namespace autoopt
