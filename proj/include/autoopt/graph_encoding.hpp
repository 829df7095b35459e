#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "autoopt/catalog.hpp"
#include "autoopt/graph.hpp"

namespace autoopt {

// Fixed-size form of a graph against one catalog: an n_ops x n_ops adjacency
// over operator identities plus one attribute vector concatenating every
// catalog operator's parameter slots (zero where the operator is absent).
// Instances of the same operator collapse onto one index, so this form is
// lossy and used one way, as surrogate/embedding input.
struct GraphEncoding {
    Eigen::MatrixXd adjacency;   // n_ops x n_ops, 0/1
    Eigen::VectorXd attributes;  // catalog.attribute_length()

    std::size_t raw_dimension() const {
        return static_cast<std::size_t>(adjacency.size()) +
               static_cast<std::size_t>(attributes.size());
    }
    Eigen::VectorXd flatten() const {
        Eigen::VectorXd out(raw_dimension());
        const auto n = adjacency.size();
        for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
            for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
                out[i * adjacency.cols() + j] = adjacency(i, j);
        out.tail(attributes.size()) = attributes;
        return out;
    }
};

inline GraphEncoding encode(const AlgorithmGraph& g, const Catalog& catalog) {
    const auto report = validate(g, catalog);
    if (!report.valid())
        throw std::invalid_argument("cannot encode invalid graph:\n" + report.summary());

    const auto n = static_cast<Eigen::Index>(catalog.size());
    GraphEncoding enc;
    enc.adjacency = Eigen::MatrixXd::Zero(n, n);
    enc.attributes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog.attribute_length()));

    for (const auto& [src, dst] : g.edges) {
        const auto* a = g.find(src);
        const auto* b = g.find(dst);
        if (!a || !b || a->role == Role::archive || b->role == Role::archive) continue;
        enc.adjacency(static_cast<Eigen::Index>(catalog.index_of(a->op_id)),
                      static_cast<Eigen::Index>(catalog.index_of(b->op_id))) = 1.0;
    }

    // repeated instances share one slot; the last one in topological order wins
    for (int id : topological_order(g)) {
        const auto* v = g.find(id);
        if (!v || v->role == Role::archive) continue;
        const auto op_index = catalog.index_of(v->op_id);
        const auto offset = catalog.attribute_offset(op_index);
        for (std::size_t k = 0; k < v->params.size(); ++k)
            enc.attributes[static_cast<Eigen::Index>(offset + k)] = v->params[k];
    }
    return enc;
}

} // namespace autoopt
