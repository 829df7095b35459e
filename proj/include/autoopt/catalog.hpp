#pragma once

#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoopt/problem.hpp"

namespace autoopt {

enum class Role { choose, search, update, archive };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::choose: return "choose";
        case Role::search: return "search";
        case Role::update: return "update";
        case Role::archive: return "archive";
    }
    return "?";
}

inline Role role_from_string(const std::string& s) {
    if (s == "choose") return Role::choose;
    if (s == "search") return Role::search;
    if (s == "update") return Role::update;
    if (s == "archive") return Role::archive;
    throw std::invalid_argument("unknown role: " + s);
}

enum class OpKind { continuous, discrete, both };
enum class Arity { unary, pair, population };

struct ParamSpec {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    double def = 0.0;
    bool integral = false;
};

struct OperatorCatalogEntry {
    std::string op_id;
    Role role = Role::search;
    OpKind kind = OpKind::both;
    std::vector<ParamSpec> params;
    Arity arity = Arity::unary;
    std::vector<std::string> needs_aux;

    bool available_for(Kind k) const {
        if (kind == OpKind::both) return true;
        return (kind == OpKind::continuous) == (k == Kind::continuous);
    }
    std::vector<double> default_params() const {
        std::vector<double> v;
        v.reserve(params.size());
        for (const auto& p : params) v.push_back(p.def);
        return v;
    }
};

// The fixed design space. Entry order is load-bearing: it defines the matrix
// and attribute-slot indices used by the fixed-size graph encoding.
class Catalog {
public:
    static const std::vector<OperatorCatalogEntry>& master() {
        static const std::vector<OperatorCatalogEntry> ops = build_master();
        return ops;
    }

    // Per-kind view of the design space, in master order.
    static const Catalog& for_kind(Kind k) {
        static const Catalog continuous{Kind::continuous};
        static const Catalog discrete{Kind::discrete};
        return k == Kind::continuous ? continuous : discrete;
    }

    Kind kind() const { return kind_; }
    const std::vector<OperatorCatalogEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    bool contains(const std::string& op_id) const { return index_.count(resolve_alias(op_id)) > 0; }

    // index of an operator inside this catalog (stable across runs)
    std::size_t index_of(const std::string& op_id) const {
        auto it = index_.find(resolve_alias(op_id));
        if (it == index_.end())
            throw std::invalid_argument("operator '" + op_id + "' not in " +
                                        std::string(to_string(kind_)) + " catalog");
        return it->second;
    }

    const OperatorCatalogEntry& entry(const std::string& op_id) const {
        return entries_[index_of(op_id)];
    }
    const OperatorCatalogEntry& entry(std::size_t i) const { return entries_.at(i); }

    // first attribute slot of each operator in the concatenated attribute vector
    std::size_t attribute_offset(std::size_t op_index) const { return offsets_.at(op_index); }
    std::size_t attribute_length() const { return attr_len_; }

    std::vector<std::string> ids_with_role(Role r) const {
        std::vector<std::string> out;
        for (const auto& e : entries_)
            if (e.role == r) out.push_back(e.op_id);
        return out;
    }

    // naming used by one designed algorithm in the source material
    static std::string resolve_alias(const std::string& op_id) {
        return op_id == "choose_nich" ? "choose_cluster" : op_id;
    }

    void dump(std::ostream& os) const {
        os << "# operator catalog (" << to_string(kind_) << "), " << entries_.size()
           << " operators, attribute length " << attr_len_ << "\n";
        os << "index\top_id\trole\tkind\tarity\tattr_offset\tparams\n";
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            os << i << "\t" << e.op_id << "\t" << to_string(e.role) << "\t"
               << (e.kind == OpKind::both ? "both"
                                          : e.kind == OpKind::continuous ? "continuous" : "discrete")
               << "\t"
               << (e.arity == Arity::unary ? "1" : e.arity == Arity::pair ? "2" : "population")
               << "\t" << offsets_[i] << "\t";
            for (std::size_t j = 0; j < e.params.size(); ++j) {
                const auto& p = e.params[j];
                os << (j ? " " : "") << p.name << "[" << p.min << "," << p.max
                   << "]=" << p.def;
            }
            os << "\n";
        }
    }

private:
    explicit Catalog(Kind k) : kind_(k) {
        for (const auto& e : master())
            if (e.available_for(k)) entries_.push_back(e);
        attr_len_ = 0;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            index_[entries_[i].op_id] = i;
            offsets_.push_back(attr_len_);
            attr_len_ += entries_[i].params.size();
        }
    }

    static std::vector<OperatorCatalogEntry> build_master() {
        using E = OperatorCatalogEntry;
        const auto P = [](std::string name, double lo, double hi, double def,
                          bool integral = false) {
            return ParamSpec{std::move(name), lo, hi, def, integral};
        };
        std::vector<E> ops;
        // choose
        ops.push_back(E{"choose_traverse", Role::choose, OpKind::both, {}, Arity::population, {}});
        ops.push_back(E{"choose_roulette_wheel", Role::choose, OpKind::both, {}, Arity::population, {}});
        ops.push_back(E{"choose_tournament", Role::choose, OpKind::both,
                        {P("k", 2, 20, 2, true)}, Arity::population, {}});
        ops.push_back(E{"choose_cluster", Role::choose, OpKind::both,
                        {P("clusters", 2, 5, 3, true)}, Arity::population, {}});
        // search, continuous + shared crossovers
        ops.push_back(E{"cross_arithmetic", Role::search, OpKind::continuous,
                        {P("rate", 0, 1, 0.9)}, Arity::pair, {}});
        ops.push_back(E{"cross_sim_binary", Role::search, OpKind::continuous,
                        {P("rate", 0, 1, 0.9), P("eta", 1, 50, 15)}, Arity::pair, {}});
        ops.push_back(E{"cross_point_one", Role::search, OpKind::both,
                        {P("rate", 0, 1, 0.9)}, Arity::pair, {}});
        ops.push_back(E{"cross_point_two", Role::search, OpKind::both,
                        {P("rate", 0, 1, 0.9)}, Arity::pair, {}});
        ops.push_back(E{"cross_point_n", Role::search, OpKind::both,
                        {P("rate", 0, 1, 0.9), P("points", 1, 10, 3, true)}, Arity::pair, {}});
        ops.push_back(E{"cross_point_uniform", Role::search, OpKind::both,
                        {P("swap_rate", 0, 1, 0.5)}, Arity::pair, {}});
        ops.push_back(E{"search_cma", Role::search, OpKind::continuous,
                        {P("step_scale", 0, 1, 0.3)}, Arity::population,
                        {"mean", "cov", "sigma", "path", "gen"}});
        ops.push_back(E{"search_eda", Role::search, OpKind::continuous,
                        {P("top_fraction", 0.1, 1, 0.5)}, Arity::population, {"mean", "var"}});
        ops.push_back(E{"search_mu_cauchy", Role::search, OpKind::continuous,
                        {P("prob", 0, 1, 0.1), P("scale", 0, 1, 0.1)}, Arity::unary, {}});
        ops.push_back(E{"search_mu_gaussian", Role::search, OpKind::continuous,
                        {P("prob", 0, 1, 0.1), P("sigma_scale", 0, 1, 0.1)}, Arity::unary, {}});
        ops.push_back(E{"search_mu_polynomial", Role::search, OpKind::continuous,
                        {P("prob", 0, 1, 0.1), P("eta", 1, 50, 20)}, Arity::unary, {}});
        ops.push_back(E{"search_mu_uniform", Role::search, OpKind::continuous,
                        {P("prob", 0, 1, 0.1)}, Arity::unary, {}});
        ops.push_back(E{"search_pso", Role::search, OpKind::continuous,
                        {P("inertia", 0, 1, 0.7298), P("cognitive", 0, 2.5, 1.4962),
                         P("social", 0, 2.5, 1.4962)},
                        Arity::population, {"pso_velocity", "pso_best_pos", "pso_best_fit"}});
        ops.push_back(E{"search_de_random", Role::search, OpKind::continuous,
                        {P("weight", 0, 1, 0.5), P("crossover", 0, 1, 0.9)}, Arity::population, {}});
        ops.push_back(E{"search_de_current", Role::search, OpKind::continuous,
                        {P("weight", 0, 1, 0.5), P("crossover", 0, 1, 0.9)}, Arity::population, {}});
        ops.push_back(E{"search_de_current_best", Role::search, OpKind::continuous,
                        {P("weight", 0, 1, 0.5), P("crossover", 0, 1, 0.9)}, Arity::population, {}});
        ops.push_back(E{"reinit_continuous", Role::search, OpKind::continuous, {}, Arity::unary, {}});
        // search, discrete
        ops.push_back(E{"search_reset_one", Role::search, OpKind::discrete, {}, Arity::unary, {}});
        ops.push_back(E{"search_reset_rand", Role::search, OpKind::discrete,
                        {P("prob", 0, 1, 0.1)}, Arity::unary, {}});
        ops.push_back(E{"search_reset_creep", Role::search, OpKind::discrete,
                        {P("prob", 0, 1, 0.1)}, Arity::unary, {}});
        ops.push_back(E{"reinit_discrete", Role::search, OpKind::discrete, {}, Arity::unary, {}});
        // update
        ops.push_back(E{"update_always", Role::update, OpKind::both, {}, Arity::population, {}});
        ops.push_back(E{"update_greedy", Role::update, OpKind::both, {}, Arity::population, {}});
        ops.push_back(E{"update_pairwise", Role::update, OpKind::both, {}, Arity::population, {}});
        ops.push_back(E{"update_round_robin", Role::update, OpKind::both,
                        {P("opponents", 1, 20, 10, true)}, Arity::population, {}});
        ops.push_back(E{"update_simulated_annealing", Role::update, OpKind::both,
                        {P("temperature", 0.01, 1, 1.0), P("cooling", 0.5, 1, 0.99)},
                        Arity::population, {"sa_temperature"}});
        return ops;
    }

    Kind kind_;
    std::vector<OperatorCatalogEntry> entries_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::size_t> offsets_;
    std::size_t attr_len_ = 0;
};

} // namespace autoopt
