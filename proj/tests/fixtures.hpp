#pragma once

#include "autoopt/graph.hpp"
#include "autoopt/graph_moves.hpp"

// Regression graphs used across the suite: the four designed algorithms we
// ship as serialization fixtures plus a GA-style discrete variant.
namespace fixtures {

using namespace autoopt;

// choose_traverse -> search_eda -> update_greedy
inline AlgorithmGraph designed_f1() {
    moves::GraphSpecForm form;
    moves::PathwaySpec p;
    p.choose = {"choose_traverse", {}};
    p.searches.push_back({"search_eda", {0.5}});
    p.update = {"update_greedy", {}};
    form.pathways.push_back(p);
    return moves::rebuild(form);
}

// choose_tournament -> cross_arithmetic(0.21) -> search_mu_polynomial(0.23, 25.68)
// -> update_pairwise
inline AlgorithmGraph designed_f2() {
    moves::GraphSpecForm form;
    moves::PathwaySpec p;
    p.choose = {"choose_tournament", {2}};
    p.searches.push_back({"cross_arithmetic", {0.21}});
    p.searches.push_back({"search_mu_polynomial", {0.23, 25.68}});
    p.update = {"update_pairwise", {}};
    form.pathways.push_back(p);
    return moves::rebuild(form);
}

// two pathways; the second is an inner loop gated on consuming `inner_budget`
// evaluations per outer round
inline AlgorithmGraph designed_f9(long long inner_budget = 500) {
    moves::GraphSpecForm form;
    moves::PathwaySpec outer;
    outer.choose = {"choose_traverse", {}};
    outer.searches.push_back({"search_mu_polynomial", {0.19, 33.03}});
    outer.update = {"update_pairwise", {}};
    moves::PathwaySpec inner;
    inner.choose = {"choose_traverse", {}};
    inner.searches.push_back({"search_mu_uniform", {0.081}});
    inner.update = {"update_pairwise", {}};
    inner.condition = {ConditionKind::budget_consumed, inner_budget};
    form.pathways.push_back(outer);
    form.pathways.push_back(inner);
    return moves::rebuild(form);
}

// GA-style discrete design: choose_tournament -> cross_point_uniform(0.34)
// -> search_reset_one -> update_pairwise
inline AlgorithmGraph designed_restoration() {
    moves::GraphSpecForm form;
    moves::PathwaySpec p;
    p.choose = {"choose_tournament", {2}};
    p.searches.push_back({"cross_point_uniform", {0.34}});
    p.searches.push_back({"search_reset_one", {}});
    p.update = {"update_pairwise", {}};
    form.pathways.push_back(p);
    return moves::rebuild(form);
}

// niching choose -> cross_point_uniform(0.12) -> search_reset_one
// -> update_round_robin
inline AlgorithmGraph designed_beamform() {
    moves::GraphSpecForm form;
    moves::PathwaySpec p;
    p.choose = {"choose_cluster", {3}};
    p.searches.push_back({"cross_point_uniform", {0.12}});
    p.searches.push_back({"search_reset_one", {}});
    p.update = {"update_round_robin", {10}};
    form.pathways.push_back(p);
    return moves::rebuild(form);
}

} // namespace fixtures
