#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "autoopt/graph.hpp"
#include "autoopt/rng.hpp"

namespace autoopt {

struct GraphParseError : std::runtime_error {
    int line;
    GraphParseError(int line_number, const std::string& message)
        : std::runtime_error("graph parse error at line " + std::to_string(line_number) + ": " +
                             message),
          line(line_number) {}
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Text form, stable field ordering so identical graphs serialize to identical
// bytes:
//   q=<q> entries=<id>,<id> parallel=<0|1>
//   <id> <role> <op_id> [<param>...] [condition=<kind>[:<threshold>]]
//   <src> -> <dst>
//   meta <key> <value>
inline std::string serialize(const AlgorithmGraph& g, bool with_metadata = true) {
    std::ostringstream os;
    os << "q=" << g.pathway_count() << " entries=";
    for (std::size_t i = 0; i < g.pathway_entries.size(); ++i)
        os << (i ? "," : "") << g.pathway_entries[i];
    os << " parallel=" << (g.parallel() ? 1 : 0) << "\n";

    auto sorted_vertices = g.vertices;
    std::sort(sorted_vertices.begin(), sorted_vertices.end(),
              [](const OperatorVertex& a, const OperatorVertex& b) { return a.id < b.id; });
    for (const auto& v : sorted_vertices) {
        os << v.id << " " << to_string(v.role) << " " << v.op_id;
        for (double p : v.params) os << " " << detail::format_double(p);
        if (v.condition) {
            os << " condition=" << to_string(v.condition->kind);
            if (v.condition->kind == ConditionKind::budget_consumed ||
                v.condition->kind == ConditionKind::stagnation)
                os << ":" << v.condition->threshold;
        }
        os << "\n";
    }

    auto sorted_edges = g.edges;
    std::sort(sorted_edges.begin(), sorted_edges.end());
    for (const auto& [src, dst] : sorted_edges) os << src << " -> " << dst << "\n";

    if (with_metadata)
        for (const auto& [key, value] : g.metadata) {
            if (key == "parallel") continue;  // carried in the header
            os << "meta " << key << " " << value << "\n";
        }
    return os.str();
}

// Serialization without provenance metadata; also the basis of the graph hash.
inline std::string serialize_structure(const AlgorithmGraph& g) { return serialize(g, false); }

inline std::uint64_t graph_hash(const AlgorithmGraph& g) {
    return fnv1a64(serialize_structure(g));
}

inline bool structurally_equal(const AlgorithmGraph& a, const AlgorithmGraph& b) {
    return serialize_structure(a) == serialize_structure(b);
}

inline AlgorithmGraph deserialize(const std::string& text) {
    std::istringstream is(text);
    AlgorithmGraph g;
    std::string line;
    int line_number = 0;
    bool have_header = false;

    while (std::getline(is, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;

        if (!have_header) {
            std::istringstream ls(line);
            std::string qtok, etok, ptok;
            ls >> qtok >> etok;
            if (qtok.rfind("q=", 0) != 0 || etok.rfind("entries=", 0) != 0)
                throw GraphParseError(line_number, "expected header 'q=<n> entries=<ids>'");
            int q = 0;
            try {
                q = std::stoi(qtok.substr(2));
            } catch (const std::exception&) {
                throw GraphParseError(line_number, "bad pathway count");
            }
            std::istringstream es(etok.substr(8));
            std::string id;
            while (std::getline(es, id, ',')) {
                try {
                    g.pathway_entries.push_back(std::stoi(id));
                } catch (const std::exception&) {
                    throw GraphParseError(line_number, "bad entry id '" + id + "'");
                }
            }
            if (q != g.pathway_count())
                throw GraphParseError(line_number, "entry count does not match q");
            if (ls >> ptok) {
                if (ptok.rfind("parallel=", 0) != 0)
                    throw GraphParseError(line_number, "unexpected header token '" + ptok + "'");
                g.set_parallel(ptok.substr(9) == "1");
            }
            have_header = true;
            continue;
        }

        if (line.rfind("meta ", 0) == 0) {
            std::istringstream ls(line.substr(5));
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(value.begin());
            if (key.empty()) throw GraphParseError(line_number, "meta line without a key");
            g.metadata[key] = value;
            continue;
        }

        if (line.find("->") != std::string::npos) {
            std::istringstream ls(line);
            int src = 0, dst = 0;
            std::string arrow;
            if (!(ls >> src >> arrow >> dst) || arrow != "->")
                throw GraphParseError(line_number, "malformed edge line");
            g.edges.emplace_back(src, dst);
            continue;
        }

        std::istringstream ls(line);
        OperatorVertex v;
        std::string role;
        if (!(ls >> v.id >> role >> v.op_id))
            throw GraphParseError(line_number, "malformed vertex line");
        try {
            v.role = role_from_string(role);
        } catch (const std::exception& e) {
            throw GraphParseError(line_number, e.what());
        }
        v.op_id = Catalog::resolve_alias(v.op_id);
        std::string tok;
        while (ls >> tok) {
            if (tok.rfind("condition=", 0) == 0) {
                const std::string body = tok.substr(10);
                const auto colon = body.find(':');
                ConditionSpec c;
                try {
                    c.kind = condition_kind_from_string(
                        colon == std::string::npos ? body : body.substr(0, colon));
                    if (colon != std::string::npos) c.threshold = std::stoll(body.substr(colon + 1));
                } catch (const std::exception& e) {
                    throw GraphParseError(line_number, e.what());
                }
                v.condition = c;
            } else {
                try {
                    std::size_t used = 0;
                    v.params.push_back(std::stod(tok, &used));
                    if (used != tok.size()) throw std::invalid_argument("trailing characters");
                } catch (const std::exception&) {
                    throw GraphParseError(line_number, "bad parameter '" + tok + "'");
                }
            }
        }
        g.vertices.push_back(std::move(v));
    }

    if (!have_header) throw GraphParseError(line_number, "empty input, no header line");
    g.sort_edges();
    return g;
}

inline void save_graph_file(const AlgorithmGraph& g, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << serialize(g);
}

inline AlgorithmGraph load_graph_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return deserialize(buf.str());
}

} // namespace autoopt
