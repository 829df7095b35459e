#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoopt/catalog.hpp"
#include "autoopt/graph.hpp"
#include "autoopt/graph_io.hpp"
#include "autoopt/rng.hpp"

namespace autoopt {

struct GraphConfig {
    int max_pathway_ops = 6;  // search vertices per pathway
    int max_pathways = 2;
    double second_pathway_prob = 0.35;
    int max_initial_searches = 2;
};

namespace moves {

struct SlotSpec {
    std::string op_id;
    std::vector<double> params;
};

struct PathwaySpec {
    SlotSpec choose;
    std::vector<SlotSpec> searches;
    SlotSpec update;
    ConditionSpec condition;
};

// Editable normal form of a graph: pathway chains with slots. Rebuilding from
// it assigns canonical vertex ids, so structurally equal graphs serialize to
// identical bytes regardless of their edit history.
struct GraphSpecForm {
    std::vector<PathwaySpec> pathways;
    bool parallel = false;
    std::map<std::string, std::string> metadata;
};

inline GraphSpecForm to_spec_form(const AlgorithmGraph& g) {
    GraphSpecForm form;
    form.parallel = g.parallel();
    form.metadata = g.metadata;
    form.metadata.erase("parallel");
    for (const auto& chain : pathway_chains(g)) {
        PathwaySpec p;
        const auto* c = g.find(chain.choose);
        const auto* u = g.find(chain.update);
        p.choose = {c->op_id, c->params};
        p.update = {u->op_id, u->params};
        for (int sid : chain.searches) {
            const auto* s = g.find(sid);
            p.searches.push_back({s->op_id, s->params});
        }
        p.condition = chain.condition;
        form.pathways.push_back(std::move(p));
    }
    return form;
}

inline AlgorithmGraph rebuild(const GraphSpecForm& form) {
    AlgorithmGraph g;
    g.metadata = form.metadata;
    g.set_parallel(form.parallel);
    int next_id = 0;
    const auto add_vertex = [&](Role role, const SlotSpec& slot,
                                std::optional<ConditionSpec> cond = std::nullopt) {
        OperatorVertex v;
        v.id = next_id++;
        v.role = role;
        v.op_id = slot.op_id;
        v.params = slot.params;
        if (cond && !(cond->kind == ConditionKind::always && cond->threshold <= 1))
            v.condition = cond;
        g.vertices.push_back(v);
        return v.id;
    };

    if (form.parallel) {
        // one shared choose vertex branching into the pathway chains
        const int choose_id = add_vertex(Role::choose, form.pathways.front().choose);
        for (const auto& p : form.pathways) {
            g.pathway_entries.push_back(choose_id);
            int prev = choose_id;
            for (std::size_t s = 0; s < p.searches.size(); ++s) {
                const int id = add_vertex(Role::search, p.searches[s],
                                          s == 0 ? std::optional<ConditionSpec>(p.condition)
                                                 : std::nullopt);
                g.edges.emplace_back(prev, id);
                prev = id;
            }
            const int uid = add_vertex(Role::update, p.update);
            g.edges.emplace_back(prev, uid);
        }
    } else {
        int prev_update = -1;
        for (const auto& p : form.pathways) {
            const int choose_id = add_vertex(Role::choose, p.choose);
            g.pathway_entries.push_back(choose_id);
            if (prev_update >= 0) g.edges.emplace_back(prev_update, choose_id);
            int prev = choose_id;
            for (std::size_t s = 0; s < p.searches.size(); ++s) {
                const int id = add_vertex(Role::search, p.searches[s],
                                          s == 0 ? std::optional<ConditionSpec>(p.condition)
                                                 : std::nullopt);
                g.edges.emplace_back(prev, id);
                prev = id;
            }
            const int uid = add_vertex(Role::update, p.update);
            g.edges.emplace_back(prev, uid);
            prev_update = uid;
        }
    }
    g.sort_edges();
    return g;
}

inline double sample_param(const ParamSpec& p, Rng& rng) {
    if (p.integral) return static_cast<double>(rng.integer(static_cast<long long>(p.min),
                                                           static_cast<long long>(p.max)));
    return rng.uniform(p.min, p.max);
}

inline SlotSpec random_slot(const Catalog& catalog, Role role, Rng& rng) {
    const auto ids = catalog.ids_with_role(role);
    const auto& id = ids[rng.index(ids.size())];
    const auto& entry = catalog.entry(id);
    SlotSpec slot{id, {}};
    for (const auto& p : entry.params) slot.params.push_back(sample_param(p, rng));
    return slot;
}

inline ConditionSpec random_condition(Rng& rng) {
    switch (rng.index(4)) {
        case 0: return {ConditionKind::always, 1};
        case 1: return {ConditionKind::budget_consumed, 10 * rng.integer(1, 50)};
        case 2: return {ConditionKind::stagnation, rng.integer(1, 5)};
        default: return {ConditionKind::local_optimum, 1};
    }
}

inline PathwaySpec random_pathway(const Catalog& catalog, Rng& rng, const GraphConfig& cfg,
                                  bool first) {
    PathwaySpec p;
    p.choose = random_slot(catalog, Role::choose, rng);
    const int n_search =
        1 + static_cast<int>(rng.index(static_cast<std::size_t>(
                std::max(1, std::min(cfg.max_initial_searches, cfg.max_pathway_ops)))));
    for (int s = 0; s < n_search; ++s) p.searches.push_back(random_slot(catalog, Role::search, rng));
    p.update = random_slot(catalog, Role::update, rng);
    p.condition = first ? ConditionSpec{} : random_condition(rng);
    return p;
}

enum class MoveKind {
    swap_operator,
    perturb_param,
    insert_search,
    delete_search,
    swap_adjacent_searches,
    toggle_condition,
    add_pathway,
    remove_pathway,
};

inline std::vector<MoveKind> applicable_moves(const GraphSpecForm& form, const GraphConfig& cfg) {
    std::vector<MoveKind> out{MoveKind::swap_operator, MoveKind::perturb_param};
    bool can_insert = false, can_delete = false, can_swap = false;
    for (const auto& p : form.pathways) {
        if (static_cast<int>(p.searches.size()) < cfg.max_pathway_ops) can_insert = true;
        if (p.searches.size() >= 2) {
            can_delete = true;
            can_swap = true;
        }
    }
    if (can_insert) out.push_back(MoveKind::insert_search);
    if (can_delete) out.push_back(MoveKind::delete_search);
    if (can_swap) out.push_back(MoveKind::swap_adjacent_searches);
    if (form.pathways.size() >= 2) out.push_back(MoveKind::toggle_condition);
    if (static_cast<int>(form.pathways.size()) < cfg.max_pathways)
        out.push_back(MoveKind::add_pathway);
    if (form.pathways.size() >= 2) out.push_back(MoveKind::remove_pathway);
    return out;
}

inline void apply_move(GraphSpecForm& form, MoveKind move, const Catalog& catalog, Rng& rng,
                       const GraphConfig& cfg) {
    auto& pathways = form.pathways;
    const auto pw = [&]() -> PathwaySpec& { return pathways[rng.index(pathways.size())]; };

    switch (move) {
        case MoveKind::swap_operator: {
            auto& p = pw();
            const std::size_t slot_count = 2 + p.searches.size();
            const std::size_t slot = rng.index(slot_count);
            Role role = slot == 0 ? Role::choose : slot + 1 == slot_count ? Role::update : Role::search;
            SlotSpec* target = slot == 0 ? &p.choose
                               : slot + 1 == slot_count ? &p.update
                                                        : &p.searches[slot - 1];
            const auto ids = catalog.ids_with_role(role);
            if (ids.size() < 2) break;
            std::string pick = target->op_id;
            while (pick == target->op_id) pick = ids[rng.index(ids.size())];
            SlotSpec fresh{pick, {}};
            for (const auto& ps : catalog.entry(pick).params)
                fresh.params.push_back(sample_param(ps, rng));
            *target = std::move(fresh);
            break;
        }
        case MoveKind::perturb_param: {
            // collect slots that actually have parameters
            std::vector<SlotSpec*> slots;
            for (auto& p : pathways) {
                slots.push_back(&p.choose);
                for (auto& s : p.searches) slots.push_back(&s);
                slots.push_back(&p.update);
            }
            std::vector<SlotSpec*> with_params;
            for (auto* s : slots)
                if (!s->params.empty()) with_params.push_back(s);
            if (with_params.empty()) break;
            SlotSpec* s = with_params[rng.index(with_params.size())];
            const auto& entry = catalog.entry(s->op_id);
            const std::size_t k = rng.index(s->params.size());
            const auto& ps = entry.params[k];
            if (ps.integral) {
                double v = s->params[k] + (rng.chance(0.5) ? 1.0 : -1.0);
                s->params[k] = std::min(std::max(v, ps.min), ps.max);
            } else {
                const double v = s->params[k] + 0.1 * (ps.max - ps.min) * rng.normal();
                s->params[k] = std::min(std::max(v, ps.min), ps.max);
            }
            break;
        }
        case MoveKind::insert_search: {
            std::vector<PathwaySpec*> eligible;
            for (auto& p : pathways)
                if (static_cast<int>(p.searches.size()) < cfg.max_pathway_ops)
                    eligible.push_back(&p);
            if (eligible.empty()) break;
            auto* p = eligible[rng.index(eligible.size())];
            const auto pos = rng.index(p->searches.size() + 1);
            p->searches.insert(p->searches.begin() + static_cast<long>(pos),
                               random_slot(catalog, Role::search, rng));
            break;
        }
        case MoveKind::delete_search: {
            std::vector<PathwaySpec*> eligible;
            for (auto& p : pathways)
                if (p.searches.size() >= 2) eligible.push_back(&p);
            if (eligible.empty()) break;
            auto* p = eligible[rng.index(eligible.size())];
            p->searches.erase(p->searches.begin() + static_cast<long>(rng.index(p->searches.size())));
            break;
        }
        case MoveKind::swap_adjacent_searches: {
            std::vector<PathwaySpec*> eligible;
            for (auto& p : pathways)
                if (p.searches.size() >= 2) eligible.push_back(&p);
            if (eligible.empty()) break;
            auto* p = eligible[rng.index(eligible.size())];
            const auto i = rng.index(p->searches.size() - 1);
            std::swap(p->searches[i], p->searches[i + 1]);
            break;
        }
        case MoveKind::toggle_condition: {
            auto& p = pathways[rng.index(pathways.size())];
            ConditionSpec next = random_condition(rng);
            int guard = 0;
            while (next == p.condition && ++guard < 8) next = random_condition(rng);
            p.condition = next;
            break;
        }
        case MoveKind::add_pathway: {
            if (static_cast<int>(pathways.size()) >= cfg.max_pathways) break;
            pathways.push_back(random_pathway(catalog, rng, cfg, false));
            break;
        }
        case MoveKind::remove_pathway: {
            if (pathways.size() < 2) break;
            pathways.erase(pathways.begin() + static_cast<long>(rng.index(pathways.size())));
            break;
        }
    }
}

} // namespace moves

// A fresh valid graph with 1 or 2 serial pathways.
inline AlgorithmGraph random_graph(const Catalog& catalog, Rng& rng, const GraphConfig& cfg = {}) {
    moves::GraphSpecForm form;
    const int q = 1 + ((cfg.max_pathways >= 2 && rng.chance(cfg.second_pathway_prob)) ? 1 : 0);
    for (int i = 0; i < q; ++i)
        form.pathways.push_back(moves::random_pathway(catalog, rng, cfg, i == 0));
    return moves::rebuild(form);
}

// Graphs one move away from `g`. Every result is valid; a move that fails to
// change the graph is resampled a bounded number of times.
inline std::vector<AlgorithmGraph> neighbors(const AlgorithmGraph& g, const Catalog& catalog,
                                             Rng& rng, const GraphConfig& cfg = {}, int count = 1) {
    const auto base = moves::to_spec_form(g);
    const std::string base_bytes = serialize_structure(moves::rebuild(base));
    std::vector<AlgorithmGraph> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        AlgorithmGraph candidate;
        for (int attempt = 0; attempt < 32; ++attempt) {
            auto form = base;
            const auto options = moves::applicable_moves(form, cfg);
            moves::apply_move(form, options[rng.index(options.size())], catalog, rng, cfg);
            candidate = moves::rebuild(form);
            if (serialize_structure(candidate) != base_bytes &&
                validate(candidate, catalog, {cfg.max_pathway_ops}).valid())
                break;
        }
        out.push_back(std::move(candidate));
    }
    return out;
}

// `strength` random moves in sequence; strength 0 returns a structural copy.
inline AlgorithmGraph perturb(const AlgorithmGraph& g, const Catalog& catalog, Rng& rng,
                              int strength = 3, const GraphConfig& cfg = {}) {
    auto form = moves::to_spec_form(g);
    for (int i = 0; i < strength; ++i) {
        const auto options = moves::applicable_moves(form, cfg);
        moves::apply_move(form, options[rng.index(options.size())], catalog, rng, cfg);
    }
    auto result = moves::rebuild(form);
    if (!validate(result, catalog, {cfg.max_pathway_ops}).valid())
        return perturb(g, catalog, rng, strength, cfg);
    return result;
}

} // namespace autoopt
