#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "autoopt/rng.hpp"

namespace autoopt {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 12;              // < 0 means unlimited
    bool bootstrap = true;
    double bootstrap_fraction = 0.8;
    double feature_fraction = -1.0;  // < 0 means sqrt(d)
    int min_samples_split = 2;
    std::uint64_t seed = 0;
};

// CART regression forest with variance-reduction splits. Deterministic given
// the seed: bootstraps and feature subsets come from per-tree derived streams,
// split ties resolve to the first candidate in fixed feature order.
class RandomForest {
public:
    void train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& config) {
        if (x.rows() != y.size()) throw std::invalid_argument("forest: rows of x and y differ");
        if (x.rows() < 1) throw std::invalid_argument("forest: empty training set");
        config_ = config;
        dims_ = static_cast<int>(x.cols());
        trees_.clear();
        trees_.reserve(static_cast<std::size_t>(config.n_trees));
        for (int t = 0; t < config.n_trees; ++t) {
            Rng rng(derive_seed(config.seed, fnv1a64("tree"), static_cast<std::uint64_t>(t)));
            trees_.push_back(build_tree(x, y, rng));
        }
    }

    double predict(const Eigen::VectorXd& x) const {
        if (trees_.empty()) throw std::logic_error("forest: not trained");
        if (x.size() != dims_) throw std::invalid_argument("forest: feature dimension mismatch");
        double total = 0.0;
        for (const auto& tree : trees_) {
            int node = 0;
            while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree[static_cast<std::size_t>(node)];
                node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
            }
            total += tree[static_cast<std::size_t>(node)].value;
        }
        return total / static_cast<double>(trees_.size());
    }

    bool trained() const { return !trees_.empty(); }
    const ForestConfig& config() const { return config_; }
    int dimensions() const { return dims_; }

private:
    struct Node {
        int feature = -1;  // leaf when < 0
        double threshold = 0.0;
        int left = -1, right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<Node>;

    Tree build_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Rng& rng) const {
        const int n = static_cast<int>(x.rows());
        std::vector<int> rows;
        if (config_.bootstrap) {
            const int m = std::max(1, static_cast<int>(std::llround(config_.bootstrap_fraction * n)));
            rows.reserve(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i)
                rows.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(n))));
        } else {
            rows.resize(static_cast<std::size_t>(n));
            std::iota(rows.begin(), rows.end(), 0);
        }
        Tree tree;
        grow(tree, x, y, rows, 0, rng);
        return tree;
    }

    int features_per_split() const {
        if (config_.feature_fraction < 0.0)
            return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dims_)))));
        return std::max(1, static_cast<int>(std::llround(config_.feature_fraction * dims_)));
    }

    int grow(Tree& tree, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             const std::vector<int>& rows, int depth, Rng& rng) const {
        const int id = static_cast<int>(tree.size());
        tree.push_back({});
        double mean = 0.0;
        for (int r : rows) mean += y[r];
        mean /= static_cast<double>(rows.size());
        tree[static_cast<std::size_t>(id)].value = mean;

        double sse = 0.0;
        for (int r : rows) sse += (y[r] - mean) * (y[r] - mean);
        const bool depth_ok = config_.max_depth < 0 || depth < config_.max_depth;
        if (!depth_ok || static_cast<int>(rows.size()) < config_.min_samples_split || sse <= 1e-24)
            return id;

        int best_feature = -1;
        double best_threshold = 0.0, best_score = sse;
        const auto candidates = rng.distinct(static_cast<std::size_t>(dims_),
                                             static_cast<std::size_t>(
                                                 std::min(features_per_split(), dims_)));
        for (std::size_t f : candidates) {
            std::vector<int> order = rows;
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return x(a, static_cast<int>(f)) < x(b, static_cast<int>(f));
            });
            double left_sum = 0.0, left_sq = 0.0;
            double right_sum = 0.0, right_sq = 0.0;
            for (int r : order) {
                right_sum += y[r];
                right_sq += y[r] * y[r];
            }
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const double v = y[order[i]];
                left_sum += v;
                left_sq += v * v;
                right_sum -= v;
                right_sq -= v * v;
                const double a = x(order[i], static_cast<int>(f));
                const double b = x(order[i + 1], static_cast<int>(f));
                if (a == b) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = static_cast<double>(order.size() - i - 1);
                const double score = (left_sq - left_sum * left_sum / nl) +
                                     (right_sq - right_sum * right_sum / nr);
                if (score < best_score - 1e-12) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (a + b);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        if (left_rows.empty() || right_rows.empty()) return id;

        tree[static_cast<std::size_t>(id)].feature = best_feature;
        tree[static_cast<std::size_t>(id)].threshold = best_threshold;
        const int left = grow(tree, x, y, left_rows, depth + 1, rng);
        tree[static_cast<std::size_t>(id)].left = left;
        const int right = grow(tree, x, y, right_rows, depth + 1, rng);
        tree[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    std::vector<Tree> trees_;
    ForestConfig config_;
    int dims_ = 0;
};

} // namespace autoopt
