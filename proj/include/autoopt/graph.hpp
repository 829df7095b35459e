#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoopt/catalog.hpp"

namespace autoopt {

enum class ConditionKind { always, budget_consumed, stagnation, local_optimum };

inline const char* to_string(ConditionKind k) {
    switch (k) {
        case ConditionKind::always: return "always";
        case ConditionKind::budget_consumed: return "budget_consumed";
        case ConditionKind::stagnation: return "stagnation";
        case ConditionKind::local_optimum: return "local_optimum";
    }
    return "?";
}

inline ConditionKind condition_kind_from_string(const std::string& s) {
    if (s == "always") return ConditionKind::always;
    if (s == "budget_consumed") return ConditionKind::budget_consumed;
    if (s == "stagnation") return ConditionKind::stagnation;
    if (s == "local_optimum") return ConditionKind::local_optimum;
    throw std::invalid_argument("unknown condition kind: " + s);
}

// Gate for one search pathway's inner loop. `threshold` is the function
// evaluation count for budget_consumed and the pass count for stagnation.
struct ConditionSpec {
    ConditionKind kind = ConditionKind::always;
    long long threshold = 1;

    bool operator==(const ConditionSpec&) const = default;
};

struct OperatorVertex {
    int id = 0;
    Role role = Role::search;
    std::string op_id;
    std::vector<double> params;
    std::optional<ConditionSpec> condition;
};

// Executable algorithm: a DAG of operator instances. Loop closure is implicit
// (the runtime re-enters the first choose vertex), so the stored edges stay
// acyclic. Pathway entries may repeat when pathways share their choose vertex
// and branch right after it.
struct AlgorithmGraph {
    std::vector<OperatorVertex> vertices;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> pathway_entries;
    std::map<std::string, std::string> metadata;

    int pathway_count() const { return static_cast<int>(pathway_entries.size()); }

    bool parallel() const {
        auto it = metadata.find("parallel");
        return it != metadata.end() && it->second == "1";
    }
    void set_parallel(bool on) {
        if (on)
            metadata["parallel"] = "1";
        else
            metadata.erase("parallel");
    }

    const OperatorVertex* find(int id) const {
        for (const auto& v : vertices)
            if (v.id == id) return &v;
        return nullptr;
    }
    OperatorVertex* find(int id) {
        for (auto& v : vertices)
            if (v.id == id) return &v;
        return nullptr;
    }

    std::vector<int> successors(int id) const {
        std::vector<int> out;
        for (const auto& [src, dst] : edges)
            if (src == id) out.push_back(dst);
        std::sort(out.begin(), out.end());
        return out;
    }
    std::vector<int> predecessors(int id) const {
        std::vector<int> out;
        for (const auto& [src, dst] : edges)
            if (dst == id) out.push_back(src);
        std::sort(out.begin(), out.end());
        return out;
    }

    void sort_edges() {
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
};

struct ValidationReport {
    struct Violation {
        std::string rule;
        std::string message;
    };
    std::vector<Violation> violations;

    bool valid() const { return violations.empty(); }
    void add(std::string rule, std::string message) {
        violations.push_back({std::move(rule), std::move(message)});
    }
    std::string summary() const {
        std::ostringstream os;
        for (const auto& v : violations) os << "[" << v.rule << "] " << v.message << "\n";
        return os.str();
    }
};

// One pathway as the executor walks it: entry choose, search chain, terminal
// update, plus any archive vertices fired after the update.
struct PathwayChain {
    int choose = -1;
    std::vector<int> searches;
    int update = -1;
    std::vector<int> archives;
    ConditionSpec condition;  // carried by the first search vertex

    std::vector<int> fired_sequence() const {
        std::vector<int> seq{choose};
        seq.insert(seq.end(), searches.begin(), searches.end());
        seq.push_back(update);
        seq.insert(seq.end(), archives.begin(), archives.end());
        return seq;
    }
};

namespace detail {

inline bool is_entry(const AlgorithmGraph& g, int id) {
    return std::find(g.pathway_entries.begin(), g.pathway_entries.end(), id) !=
           g.pathway_entries.end();
}

// Walks pathway `index` from its entry. `branch` is the occurrence number of
// this entry in the entry list, selecting the branch at a shared choose.
inline std::optional<PathwayChain> walk_pathway(const AlgorithmGraph& g, int index,
                                                ValidationReport* report) {
    const int entry = g.pathway_entries[static_cast<std::size_t>(index)];
    int branch = 0;
    for (int i = 0; i < index; ++i)
        if (g.pathway_entries[static_cast<std::size_t>(i)] == entry) ++branch;

    const auto fail = [&](const std::string& rule, const std::string& msg) {
        if (report) report->add(rule, msg);
        return std::nullopt;
    };

    const OperatorVertex* v = g.find(entry);
    if (!v) return fail("entries", "pathway " + std::to_string(index) + " entry does not exist");
    if (v->role != Role::choose)
        return fail("entries", "pathway " + std::to_string(index) + " entry is not a choose vertex");

    PathwayChain chain;
    chain.choose = entry;

    auto non_archive = [&](const std::vector<int>& ids) {
        std::vector<int> out;
        for (int id : ids) {
            const auto* s = g.find(id);
            if (s && s->role != Role::archive) out.push_back(id);
        }
        return out;
    };

    auto succ = non_archive(g.successors(entry));
    if (static_cast<std::size_t>(branch) >= succ.size())
        return fail("pathway-shape", "pathway " + std::to_string(index) +
                                         ": entry has no branch for this pathway");
    int cur = succ[static_cast<std::size_t>(branch)];

    std::set<int> visited{entry};
    while (true) {
        if (visited.count(cur))
            return fail("acyclic", "pathway " + std::to_string(index) + " revisits vertex " +
                                       std::to_string(cur));
        visited.insert(cur);
        const auto* vertex = g.find(cur);
        if (!vertex) return fail("edges", "edge points to missing vertex " + std::to_string(cur));

        if (vertex->role == Role::search) {
            chain.searches.push_back(cur);
        } else if (vertex->role == Role::update) {
            chain.update = cur;
            for (int id : g.successors(cur)) {
                const auto* s = g.find(id);
                if (s && s->role == Role::archive)
                    chain.archives.push_back(id);
                else if (!is_entry(g, id))
                    return fail("pathway-shape",
                                "update " + std::to_string(cur) + " leads to vertex " +
                                    std::to_string(id) + " which is not a pathway entry");
            }
            break;
        } else {
            return fail("pathway-shape", "pathway " + std::to_string(index) +
                                             " contains unexpected " +
                                             std::string(to_string(vertex->role)) + " vertex " +
                                             std::to_string(cur));
        }

        const auto next = non_archive(g.successors(cur));
        if (next.empty())
            return fail("roles", "pathway " + std::to_string(index) + " has no update vertex");
        if (next.size() > 1)
            return fail("pathway-shape", "vertex " + std::to_string(cur) +
                                             " has multiple successors inside a pathway");
        cur = next[0];
    }

    if (chain.searches.empty())
        return fail("roles", "pathway " + std::to_string(index) + " has no search vertex");
    if (const auto* first = g.find(chain.searches.front()); first && first->condition)
        chain.condition = *first->condition;
    return chain;
}

} // namespace detail

// All pathway chains; throws if the graph does not walk cleanly.
inline std::vector<PathwayChain> pathway_chains(const AlgorithmGraph& g) {
    std::vector<PathwayChain> chains;
    for (int i = 0; i < g.pathway_count(); ++i) {
        auto c = detail::walk_pathway(g, i, nullptr);
        if (!c) throw std::invalid_argument("graph pathway " + std::to_string(i) + " is malformed");
        chains.push_back(*c);
    }
    return chains;
}

struct ValidationOptions {
    int max_pathway_ops = 6;  // search vertices allowed per pathway
};

inline ValidationReport validate(const AlgorithmGraph& g, const Catalog& catalog,
                                 const ValidationOptions& opt = {}) {
    ValidationReport report;

    if (g.vertices.size() < 3)
        report.add("size", "graph has " + std::to_string(g.vertices.size()) +
                               " vertices, needs at least 3");

    std::set<int> ids;
    for (const auto& v : g.vertices)
        if (!ids.insert(v.id).second)
            report.add("unique-ids", "duplicate vertex id " + std::to_string(v.id));
    for (const auto& [src, dst] : g.edges) {
        if (!ids.count(src) || !ids.count(dst))
            report.add("edges", "edge " + std::to_string(src) + "->" + std::to_string(dst) +
                                    " references a missing vertex");
        if (src == dst) report.add("acyclic", "self edge on vertex " + std::to_string(src));
    }

    // acyclicity over explicit edges (Kahn)
    {
        std::map<int, int> indegree;
        for (const auto& v : g.vertices) indegree[v.id] = 0;
        for (const auto& [src, dst] : g.edges)
            if (ids.count(src) && ids.count(dst)) ++indegree[dst];
        std::vector<int> queue;
        for (const auto& [id, deg] : indegree)
            if (deg == 0) queue.push_back(id);
        std::size_t seen = 0;
        while (!queue.empty()) {
            std::sort(queue.begin(), queue.end());
            const int id = queue.front();
            queue.erase(queue.begin());
            ++seen;
            for (int s : g.successors(id))
                if (indegree.count(s) && --indegree[s] == 0) queue.push_back(s);
        }
        if (seen != g.vertices.size()) report.add("acyclic", "explicit edges contain a cycle");
    }

    // weak connectivity: no isolated sub-graphs
    if (!g.vertices.empty()) {
        std::map<int, int> parent;
        for (const auto& v : g.vertices) parent[v.id] = v.id;
        std::function<int(int)> root = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& [src, dst] : g.edges)
            if (ids.count(src) && ids.count(dst)) parent[root(src)] = root(dst);
        std::set<int> components;
        for (const auto& v : g.vertices) components.insert(root(v.id));
        if (components.size() > 1)
            report.add("connected", "graph has " + std::to_string(components.size()) +
                                        " isolated sub-graphs");
    }

    if (g.pathway_entries.empty()) report.add("entries", "graph declares no pathway entries");

    std::set<int> covered;
    for (int i = 0; i < g.pathway_count(); ++i) {
        auto chain = detail::walk_pathway(g, i, &report);
        if (!chain) continue;
        if (static_cast<int>(chain->searches.size()) > opt.max_pathway_ops)
            report.add("pathway-length",
                       "pathway " + std::to_string(i) + " has " +
                           std::to_string(chain->searches.size()) + " search vertices, cap is " +
                           std::to_string(opt.max_pathway_ops));
        for (int id : chain->fired_sequence()) covered.insert(id);
    }
    for (const auto& v : g.vertices)
        if (!covered.count(v.id) && v.role != Role::archive)
            report.add("coverage", "vertex " + std::to_string(v.id) + " is not on any pathway");

    for (const auto& v : g.vertices) {
        if (v.role == Role::archive) {
            bool fed = false;
            for (int pred : g.predecessors(v.id)) {
                const auto* pv = g.find(pred);
                if (pv && pv->role == Role::update) fed = true;
            }
            if (!fed)
                report.add("archive", "archive vertex " + std::to_string(v.id) +
                                          " has no incoming edge from an update");
            continue;
        }
        if (!catalog.contains(v.op_id)) {
            report.add("catalog", "operator '" + v.op_id + "' not in " +
                                      std::string(to_string(catalog.kind())) + " catalog");
            continue;
        }
        const auto& entry = catalog.entry(v.op_id);
        if (entry.role != v.role)
            report.add("catalog", "vertex " + std::to_string(v.id) + " declares role " +
                                      to_string(v.role) + " but operator '" + v.op_id + "' is a " +
                                      to_string(entry.role) + " operator");
        if (v.params.size() != entry.params.size()) {
            report.add("params", "vertex " + std::to_string(v.id) + " has " +
                                     std::to_string(v.params.size()) + " params, operator '" +
                                     v.op_id + "' expects " + std::to_string(entry.params.size()));
        } else {
            for (std::size_t k = 0; k < v.params.size(); ++k)
                if (v.params[k] < entry.params[k].min || v.params[k] > entry.params[k].max)
                    report.add("params", "vertex " + std::to_string(v.id) + " param '" +
                                             entry.params[k].name + "' out of range");
        }
        if (v.condition && v.condition->threshold < 1)
            report.add("condition", "vertex " + std::to_string(v.id) + " condition threshold < 1");
    }

    return report;
}

// deterministic topological order (Kahn, smallest id first); throws on cycles
inline std::vector<int> topological_order(const AlgorithmGraph& g) {
    std::map<int, int> indegree;
    for (const auto& v : g.vertices) indegree[v.id] = 0;
    for (const auto& [src, dst] : g.edges) ++indegree[dst];
    std::set<int> ready;
    for (const auto& [id, deg] : indegree)
        if (deg == 0) ready.insert(id);
    std::vector<int> order;
    while (!ready.empty()) {
        const int id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (int s : g.successors(id))
            if (--indegree[s] == 0) ready.insert(s);
    }
    if (order.size() != g.vertices.size())
        throw std::invalid_argument("graph has a cycle; topological order undefined");
    return order;
}

} // namespace autoopt
