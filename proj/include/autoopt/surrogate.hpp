#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoopt/forest.hpp"
#include "autoopt/graph_encoding.hpp"
#include "autoopt/vgae.hpp"

namespace autoopt {

struct TrainingSample {
    GraphEncoding encoding;
    double label = 0.0;           // mean fitness from exact evaluation
    std::uint64_t graph_id = 0;   // serialization hash, used for holdout disjointness
};

enum class SurrogateSpace { embedding, raw };

inline const char* to_string(SurrogateSpace s) {
    return s == SurrogateSpace::embedding ? "embedding" : "raw";
}

// Performance estimator: a regression forest over either VGAE embeddings or
// the flattened adjacency + attribute vector.
struct SurrogateModel {
    SurrogateSpace space = SurrogateSpace::raw;
    RandomForest forest;
    VGAEModel embedder;          // used in embedding space only
    bool has_embedder = false;
    std::set<std::uint64_t> training_ids;

    Eigen::VectorXd features(const GraphEncoding& enc, const Catalog& catalog) const {
        if (space == SurrogateSpace::embedding) {
            if (!has_embedder) throw std::logic_error("surrogate: embedding space without embedder");
            return embed(embedder, enc, catalog);
        }
        return enc.flatten();
    }
    double predict(const GraphEncoding& enc, const Catalog& catalog) const {
        return forest.predict(features(enc, catalog));
    }
};

inline SurrogateModel surrogate_train(const std::vector<TrainingSample>& samples,
                                      const VGAEModel* embedder, SurrogateSpace space,
                                      const Catalog& catalog, const ForestConfig& config) {
    if (samples.size() < 10)
        throw std::invalid_argument("surrogate_train needs at least 10 labeled samples");
    if (space == SurrogateSpace::embedding && !embedder)
        throw std::invalid_argument("surrogate_train: embedding space requires a trained VGAE");

    SurrogateModel model;
    model.space = space;
    if (embedder) {
        model.embedder = *embedder;
        model.has_embedder = true;
    }
    for (const auto& s : samples) model.training_ids.insert(s.graph_id);

    const Eigen::VectorXd first = model.features(samples.front().encoding, catalog);
    Eigen::MatrixXd x(samples.size(), first.size());
    Eigen::VectorXd y(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) =
            model.features(samples[i].encoding, catalog).transpose();
        y[static_cast<Eigen::Index>(i)] = samples[i].label;
        if (!std::isfinite(samples[i].label))
            throw std::invalid_argument("surrogate_train: non-finite label");
    }
    model.forest.train(x, y, config);
    return model;
}

// Kendall's tau-b (tie corrected). Throws when a ranking is degenerate
// (all ties on either side) or the lengths differ.
inline double kendall_tau(const std::vector<double>& estimated,
                          const std::vector<double>& exact) {
    const std::size_t n = estimated.size();
    if (n != exact.size()) throw std::invalid_argument("kendall_tau: length mismatch");
    if (n < 2) throw std::invalid_argument("kendall_tau: need at least two observations");

    long long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = estimated[i] - estimated[j];
            const double dy = exact[i] - exact[j];
            if (dx == 0.0 || dy == 0.0) continue;
            if ((dx > 0.0) == (dy > 0.0))
                ++concordant;
            else
                ++discordant;
        }
    const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    double tied_pairs_x = 0.0, tied_pairs_y = 0.0;
    {
        // recount tie groups for the tau-b denominator
        auto group_pairs = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            double pairs = 0.0;
            std::size_t i = 0;
            while (i < v.size()) {
                std::size_t j = i;
                while (j < v.size() && v[j] == v[i]) ++j;
                const double t = static_cast<double>(j - i);
                pairs += 0.5 * t * (t - 1.0);
                i = j;
            }
            return pairs;
        };
        tied_pairs_x = group_pairs(estimated);
        tied_pairs_y = group_pairs(exact);
    }
    const double denom = std::sqrt((n0 - tied_pairs_x) * (n0 - tied_pairs_y));
    if (denom <= 0.0)
        throw std::invalid_argument("kendall_tau: degenerate ranking (all values tied)");
    return (static_cast<double>(concordant) - static_cast<double>(discordant)) / denom;
}

struct AccuracyReport {
    double tau = 0.0;
    int holdout_size = 0;
    int training_size = 0;
    SurrogateSpace space = SurrogateSpace::raw;
};

// tau between surrogate estimates and exact labels on a holdout that must be
// disjoint (by graph hash) from the training set.
inline AccuracyReport accuracy_report(const SurrogateModel& model,
                                      const std::vector<TrainingSample>& holdout,
                                      const Catalog& catalog) {
    for (const auto& s : holdout)
        if (model.training_ids.count(s.graph_id))
            throw std::invalid_argument("accuracy_report: holdout overlaps the training set");
    std::vector<double> estimated, exact;
    estimated.reserve(holdout.size());
    exact.reserve(holdout.size());
    for (const auto& s : holdout) {
        estimated.push_back(model.predict(s.encoding, catalog));
        exact.push_back(s.label);
    }
    AccuracyReport report;
    report.tau = kendall_tau(estimated, exact);
    report.holdout_size = static_cast<int>(holdout.size());
    report.training_size = static_cast<int>(model.training_ids.size());
    report.space = model.space;
    return report;
}

} // namespace autoopt
