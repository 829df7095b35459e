#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoopt/catalog.hpp"
#include "autoopt/problem.hpp"
#include "autoopt/rng.hpp"

namespace autoopt {

// Inputs for one operator application. `population` is S for choose/update
// roles and S' for search roles; `offspring` is S_new and only set for update
// roles. `state_key` namespaces shared aux so that two instances of the same
// stateful operator in one graph do not collide.
struct OperatorIO {
    SolutionSet population;
    SolutionSet offspring;
    std::vector<double> params;
    Rng* rng = nullptr;
    const Problem* problem = nullptr;
    std::string state_key;
};

namespace ops {

inline void check_params(const OperatorCatalogEntry& entry, const std::vector<double>& params) {
    if (params.size() != entry.params.size())
        throw std::invalid_argument(entry.op_id + ": expected " +
                                    std::to_string(entry.params.size()) + " params, got " +
                                    std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = entry.params[i];
        if (params[i] < p.min || params[i] > p.max)
            throw std::invalid_argument(entry.op_id + ": param '" + p.name + "' out of range");
    }
}

inline int int_param(double v) { return static_cast<int>(std::llround(v)); }

// ---------------------------------------------------------------------------
// choose
// ---------------------------------------------------------------------------

inline SolutionSet choose_traverse(const SolutionSet& s) { return s; }

inline SolutionSet choose_roulette_wheel(const SolutionSet& s, Rng& rng) {
    const int n = s.size();
    const double fmax = s.fitness.maxCoeff();
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = fmax - s.fitness[i];
    const double eps = 1e-12 * std::max(1.0, std::abs(fmax));
    w.array() += eps;
    const double total = w.sum();
    std::vector<std::size_t> picks(static_cast<std::size_t>(n));
    for (auto& pick : picks) {
        double r = rng.uniform() * total, acc = 0.0;
        std::size_t chosen = static_cast<std::size_t>(n - 1);
        for (int i = 0; i < n; ++i) {
            acc += w[i];
            if (r < acc) {
                chosen = static_cast<std::size_t>(i);
                break;
            }
        }
        pick = chosen;
    }
    return s.pick(picks);
}

inline SolutionSet choose_tournament(const SolutionSet& s, int k, Rng& rng) {
    const int n = s.size();
    k = std::min(std::max(k, 2), n);
    std::vector<std::size_t> picks(static_cast<std::size_t>(n));
    for (auto& pick : picks) {
        const auto contestants = rng.distinct(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
        std::size_t best = contestants[0];
        for (std::size_t c : contestants)
            if (s.fitness[static_cast<int>(c)] < s.fitness[static_cast<int>(best)]) best = c;
        pick = best;
    }
    return s.pick(picks);
}

// k-means style grouping, then uniform picks inside a uniformly chosen
// non-empty cluster.
inline SolutionSet choose_cluster(const SolutionSet& s, int clusters, Rng& rng) {
    const int n = s.size();
    const int k = std::min(std::max(clusters, 2), std::max(2, std::min(5, n)));
    if (n <= 2) return s;

    const auto seeds = rng.distinct(static_cast<std::size_t>(n), static_cast<std::size_t>(std::min(k, n)));
    Eigen::MatrixXd centroids(seeds.size(), s.dim());
    for (std::size_t c = 0; c < seeds.size(); ++c)
        centroids.row(static_cast<int>(c)) = s.decisions.row(static_cast<int>(seeds[c]));

    std::vector<int> assignment(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 5; ++iter) {
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (s.decisions.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < centroids.rows(); ++c) {
                const double d = (s.decisions.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assignment[static_cast<std::size_t>(i)] = best;
        }
        for (int c = 0; c < centroids.rows(); ++c) {
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(s.dim());
            int count = 0;
            for (int i = 0; i < n; ++i)
                if (assignment[static_cast<std::size_t>(i)] == c) {
                    mean += s.decisions.row(i);
                    ++count;
                }
            if (count > 0) centroids.row(c) = mean / count;
        }
    }

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(centroids.rows()));
    for (int i = 0; i < n; ++i)
        members[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])].push_back(
            static_cast<std::size_t>(i));
    std::vector<std::size_t> nonempty;
    for (std::size_t c = 0; c < members.size(); ++c)
        if (!members[c].empty()) nonempty.push_back(c);

    std::vector<std::size_t> picks(static_cast<std::size_t>(n));
    for (auto& pick : picks) {
        const auto& group = members[nonempty[rng.index(nonempty.size())]];
        pick = group[rng.index(group.size())];
    }
    return s.pick(picks);
}

// ---------------------------------------------------------------------------
// search: helpers
// ---------------------------------------------------------------------------

inline SolutionSet fresh_offspring(const SolutionSet& parents) {
    SolutionSet out = parents;
    out.mark_unevaluated();
    return out;
}

inline void repair_all(const Problem& p, SolutionSet& s) {
    for (int i = 0; i < s.size(); ++i) repair(p, s.decisions.row(i));
}

// ---------------------------------------------------------------------------
// search: crossovers (pair arity)
// ---------------------------------------------------------------------------

template <typename PairFn>
SolutionSet crossover_pairs(const SolutionSet& parents, PairFn&& fn) {
    if (parents.size() < 2)
        throw std::invalid_argument("crossover requires at least two parents");
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i + 1 < parents.size(); i += 2) {
        Eigen::RowVectorXd a = parents.decisions.row(i);
        Eigen::RowVectorXd b = parents.decisions.row(i + 1);
        fn(a, b);
        out.decisions.row(i) = a;
        out.decisions.row(i + 1) = b;
    }
    return out;
}

inline SolutionSet cross_arithmetic(const SolutionSet& parents, double rate, Rng& rng) {
    return crossover_pairs(parents, [&](Eigen::RowVectorXd& a, Eigen::RowVectorXd& b) {
        if (!rng.chance(rate)) return;
        const double alpha = rng.uniform();
        const Eigen::RowVectorXd c1 = alpha * a + (1.0 - alpha) * b;
        const Eigen::RowVectorXd c2 = (1.0 - alpha) * a + alpha * b;
        a = c1;
        b = c2;
    });
}

inline SolutionSet cross_sim_binary(const SolutionSet& parents, double rate, double eta, Rng& rng) {
    return crossover_pairs(parents, [&](Eigen::RowVectorXd& a, Eigen::RowVectorXd& b) {
        if (!rng.chance(rate)) return;
        for (int j = 0; j < a.size(); ++j) {
            const double u = rng.uniform();
            const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                                         : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
            const double x = a[j], y = b[j];
            a[j] = 0.5 * ((1.0 + beta) * x + (1.0 - beta) * y);
            b[j] = 0.5 * ((1.0 - beta) * x + (1.0 + beta) * y);
        }
    });
}

inline SolutionSet cross_points(const SolutionSet& parents, double rate, int points, Rng& rng) {
    return crossover_pairs(parents, [&](Eigen::RowVectorXd& a, Eigen::RowVectorXd& b) {
        const int d = static_cast<int>(a.size());
        if (d < 2 || !rng.chance(rate)) return;
        const int cuts = std::min(points, d - 1);
        auto positions = rng.distinct(static_cast<std::size_t>(d - 1), static_cast<std::size_t>(cuts));
        std::sort(positions.begin(), positions.end());
        bool swap = false;
        std::size_t next = 0;
        for (int j = 0; j < d; ++j) {
            while (next < positions.size() && static_cast<int>(positions[next]) + 1 == j) {
                swap = !swap;
                ++next;
            }
            if (swap) std::swap(a[j], b[j]);
        }
    });
}

inline SolutionSet cross_point_uniform(const SolutionSet& parents, double swap_rate, Rng& rng) {
    return crossover_pairs(parents, [&](Eigen::RowVectorXd& a, Eigen::RowVectorXd& b) {
        for (int j = 0; j < a.size(); ++j)
            if (rng.chance(swap_rate)) std::swap(a[j], b[j]);
    });
}

// ---------------------------------------------------------------------------
// search: mutations (unary arity)
// ---------------------------------------------------------------------------

inline SolutionSet search_mu_cauchy(const SolutionSet& parents, const Problem& p, double prob,
                                    double scale, Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j)
            if (rng.chance(prob))
                out.decisions(i, j) += scale * (p.upper(j) - p.lower(j)) * rng.cauchy();
    repair_all(p, out);
    return out;
}

inline SolutionSet search_mu_gaussian(const SolutionSet& parents, const Problem& p, double prob,
                                      double sigma_scale, Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j)
            if (rng.chance(prob))
                out.decisions(i, j) += sigma_scale * (p.upper(j) - p.lower(j)) * rng.normal();
    repair_all(p, out);
    return out;
}

inline double polynomial_step(double x, double lo, double hi, double eta, double u) {
    const double range = hi - lo;
    if (range <= 0.0) return x;
    const double d1 = (x - lo) / range, d2 = (hi - x) / range;
    double dq;
    if (u <= 0.5) {
        const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(val, 1.0 / (eta + 1.0)) - 1.0;
    } else {
        const double val = 2.0 * (1.0 - u) + (2.0 * u - 1.0) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(val, 1.0 / (eta + 1.0));
    }
    return x + dq * range;
}

inline SolutionSet search_mu_polynomial(const SolutionSet& parents, const Problem& p, double prob,
                                        double eta, Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j)
            if (rng.chance(prob))
                out.decisions(i, j) =
                    polynomial_step(out.decisions(i, j), p.lower(j), p.upper(j), eta, rng.uniform());
    repair_all(p, out);
    return out;
}

inline SolutionSet search_mu_uniform(const SolutionSet& parents, const Problem& p, double prob,
                                     Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j)
            if (rng.chance(prob)) out.decisions(i, j) = rng.uniform(p.lower(j), p.upper(j));
    repair_all(p, out);
    return out;
}

inline SolutionSet reinit_continuous(const SolutionSet& parents, const Problem& p, Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j) out.decisions(i, j) = rng.uniform(p.lower(j), p.upper(j));
    return out;
}

// discrete resets

inline SolutionSet search_reset_one(const SolutionSet& parents, const Problem& p, Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i) {
        const int j = static_cast<int>(rng.index(static_cast<std::size_t>(out.dim())));
        out.decisions(i, j) = static_cast<double>(rng.integer(0, p.alphabet(j) - 1));
    }
    return out;
}

inline SolutionSet search_reset_rand(const SolutionSet& parents, const Problem& p, double prob,
                                     Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j)
            if (rng.chance(prob))
                out.decisions(i, j) = static_cast<double>(rng.integer(0, p.alphabet(j) - 1));
    return out;
}

// +/-1 creep, clamped at the alphabet edges (no wraparound)
inline SolutionSet search_reset_creep(const SolutionSet& parents, const Problem& p, double prob,
                                      Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j)
            if (rng.chance(prob)) {
                const double step = rng.chance(0.5) ? 1.0 : -1.0;
                out.decisions(i, j) =
                    std::min(std::max(out.decisions(i, j) + step, 0.0), p.upper(j));
            }
    return out;
}

inline SolutionSet reinit_discrete(const SolutionSet& parents, const Problem& p, Rng& rng) {
    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < out.size(); ++i)
        for (int j = 0; j < out.dim(); ++j)
            out.decisions(i, j) = static_cast<double>(rng.integer(0, p.alphabet(j) - 1));
    return out;
}

// ---------------------------------------------------------------------------
// search: differential evolution family (population arity)
// ---------------------------------------------------------------------------

inline Eigen::RowVectorXd de_mutant_random(const Eigen::RowVectorXd& r1,
                                           const Eigen::RowVectorXd& r2,
                                           const Eigen::RowVectorXd& r3, double f) {
    return r1 + f * (r2 - r3);
}

inline Eigen::RowVectorXd de_mutant_current(const Eigen::RowVectorXd& x,
                                            const Eigen::RowVectorXd& r1,
                                            const Eigen::RowVectorXd& r2, double f) {
    return x + f * (r1 - r2);
}

inline Eigen::RowVectorXd de_mutant_current_best(const Eigen::RowVectorXd& x,
                                                 const Eigen::RowVectorXd& best,
                                                 const Eigen::RowVectorXd& r1,
                                                 const Eigen::RowVectorXd& r2, double f) {
    return x + f * (best - x) + f * (r1 - r2);
}

inline void de_binomial_cross(Eigen::RowVectorXd& child, const Eigen::RowVectorXd& target,
                              double cr, Rng& rng) {
    const int d = static_cast<int>(child.size());
    const int forced = static_cast<int>(rng.index(static_cast<std::size_t>(d)));
    for (int j = 0; j < d; ++j)
        if (j != forced && !rng.chance(cr)) child[j] = target[j];
}

enum class DeVariant { random_1, current_1, current_to_best_1 };

inline SolutionSet search_de(const SolutionSet& parents, const Problem& p, DeVariant variant,
                             double f, double cr, Rng& rng) {
    const int n = parents.size();
    SolutionSet out = fresh_offspring(parents);
    int best = parents.best_index();
    if (best < 0) best = 0;

    // distinct donors when the population allows it
    auto pick_donors = [&](int target, int count) {
        std::vector<int> donors;
        int guard = 0;
        while (static_cast<int>(donors.size()) < count) {
            const int c = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
            const bool dup = c == target ||
                             std::find(donors.begin(), donors.end(), c) != donors.end();
            if (!dup || ++guard > 16 * count + 16) donors.push_back(c);
        }
        return donors;
    };

    for (int i = 0; i < n; ++i) {
        Eigen::RowVectorXd child;
        switch (variant) {
            case DeVariant::random_1: {
                const auto d = pick_donors(i, 3);
                child = de_mutant_random(parents.decisions.row(d[0]), parents.decisions.row(d[1]),
                                         parents.decisions.row(d[2]), f);
                break;
            }
            case DeVariant::current_1: {
                const auto d = pick_donors(i, 2);
                child = de_mutant_current(parents.decisions.row(i), parents.decisions.row(d[0]),
                                          parents.decisions.row(d[1]), f);
                break;
            }
            case DeVariant::current_to_best_1: {
                const auto d = pick_donors(i, 2);
                child = de_mutant_current_best(parents.decisions.row(i), parents.decisions.row(best),
                                               parents.decisions.row(d[0]),
                                               parents.decisions.row(d[1]), f);
                break;
            }
        }
        de_binomial_cross(child, parents.decisions.row(i), cr, rng);
        out.decisions.row(i) = child;
    }
    repair_all(p, out);
    return out;
}

// ---------------------------------------------------------------------------
// search: stateful operators (PSO / EDA / CMA)
// ---------------------------------------------------------------------------

inline SolutionSet search_pso(const SolutionSet& parents, const Problem& p, double inertia,
                              double cognitive, double social, Rng& rng) {
    const int n = parents.size(), d = parents.dim();
    SolutionSet out = fresh_offspring(parents);

    if (!out.row_aux.count("pso_velocity")) out.row_aux["pso_velocity"] = Eigen::MatrixXd::Zero(n, d);
    if (!out.row_aux.count("pso_best_pos")) out.row_aux["pso_best_pos"] = parents.decisions;
    if (!out.row_aux.count("pso_best_fit")) {
        Eigen::MatrixXd bf(n, 1);
        for (int i = 0; i < n; ++i) bf(i, 0) = parents.fitness[i];
        out.row_aux["pso_best_fit"] = bf;
    }
    auto& vel = out.row_aux["pso_velocity"];
    auto& bpos = out.row_aux["pso_best_pos"];
    auto& bfit = out.row_aux["pso_best_fit"];

    for (int i = 0; i < n; ++i)
        if (parents.evaluated[static_cast<std::size_t>(i)] && parents.fitness[i] < bfit(i, 0)) {
            bfit(i, 0) = parents.fitness[i];
            bpos.row(i) = parents.decisions.row(i);
        }
    int gbest = 0;
    for (int i = 1; i < n; ++i)
        if (bfit(i, 0) < bfit(gbest, 0)) gbest = i;

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            const double r1 = rng.uniform(), r2 = rng.uniform();
            vel(i, j) = inertia * vel(i, j) +
                        cognitive * r1 * (bpos(i, j) - parents.decisions(i, j)) +
                        social * r2 * (bpos(gbest, j) - parents.decisions(i, j));
        }
        out.decisions.row(i) = parents.decisions.row(i) + vel.row(i);
    }
    repair_all(p, out);
    return out;
}

// univariate Gaussian model over the top fraction, variance floored
inline SolutionSet search_eda(const SolutionSet& parents, const Problem& p, double top_fraction,
                              Rng& rng, const std::string& state_key) {
    const int n = parents.size(), d = parents.dim();
    const int mu = std::max(1, static_cast<int>(std::llround(top_fraction * n)));

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return parents.fitness[a] < parents.fitness[b]; });

    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d), var = Eigen::RowVectorXd::Zero(d);
    for (int r = 0; r < mu; ++r) mean += parents.decisions.row(order[static_cast<std::size_t>(r)]);
    mean /= mu;
    for (int r = 0; r < mu; ++r) {
        const Eigen::RowVectorXd diff =
            parents.decisions.row(order[static_cast<std::size_t>(r)]) - mean;
        var += diff.cwiseProduct(diff);
    }
    var /= mu;
    var = var.cwiseMax(1e-12);

    SolutionSet out = fresh_offspring(parents);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) out.decisions(i, j) = mean[j] + std::sqrt(var[j]) * rng.normal();
    repair_all(p, out);
    out.shared_aux[state_key + "mean"] = mean;
    out.shared_aux[state_key + "var"] = var;
    return out;
}

// Rank-mu covariance adaptation with cumulative step-size control. State is
// carried in shared aux under the instance's key.
inline SolutionSet search_cma(const SolutionSet& parents, const Problem& p, double step_scale,
                              Rng& rng, const std::string& state_key) {
    const int n = parents.size(), d = parents.dim();
    const int mu = std::max(1, n / 2);

    Eigen::VectorXd weights(mu);
    for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    weights /= weights.sum();
    const double mu_eff = 1.0 / weights.squaredNorm();
    const double c_sigma = (mu_eff + 2.0) / (d + mu_eff + 5.0);
    const double d_sigma =
        1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (d + 1.0)) - 1.0) + c_sigma;
    const double c_mu =
        std::min(1.0, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0) * (d + 2.0) + mu_eff));
    const double chi_n = std::sqrt(static_cast<double>(d)) *
                         (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return parents.fitness[a] < parents.fitness[b]; });

    SolutionSet out = fresh_offspring(parents);
    Eigen::RowVectorXd m;
    Eigen::MatrixXd cov;
    double sigma = 0.0;
    Eigen::RowVectorXd path;

    const auto mean_key = state_key + "mean";
    if (!parents.shared_aux.count(mean_key)) {
        m = Eigen::RowVectorXd::Zero(d);
        for (int i = 0; i < mu; ++i)
            m += weights[i] * parents.decisions.row(order[static_cast<std::size_t>(i)]);
        cov = Eigen::MatrixXd::Identity(d, d);
        double range = 0.0;
        for (int j = 0; j < d; ++j) range += p.upper(j) - p.lower(j);
        sigma = step_scale * range / d;
        path = Eigen::RowVectorXd::Zero(d);
    } else {
        m = parents.shared_aux.at(mean_key);
        cov = parents.shared_aux.at(state_key + "cov");
        sigma = parents.shared_aux.at(state_key + "sigma")(0, 0);
        path = parents.shared_aux.at(state_key + "path");
        if (static_cast<int>(m.size()) != d)
            throw std::invalid_argument("search_cma: state dimension mismatch");

        if (sigma > 0.0) {
            Eigen::RowVectorXd m_new = Eigen::RowVectorXd::Zero(d);
            for (int i = 0; i < mu; ++i)
                m_new += weights[i] * parents.decisions.row(order[static_cast<std::size_t>(i)]);

            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
            const Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(1e-20);
            const Eigen::MatrixXd inv_sqrt = eig.eigenvectors() *
                                             evals.cwiseSqrt().cwiseInverse().asDiagonal() *
                                             eig.eigenvectors().transpose();
            path = (1.0 - c_sigma) * path +
                   std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) / sigma *
                       (m_new - m) * inv_sqrt.transpose();
            sigma *= std::exp(c_sigma / d_sigma * (path.norm() / chi_n - 1.0));

            Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i < mu; ++i) {
                const Eigen::RowVectorXd y =
                    (parents.decisions.row(order[static_cast<std::size_t>(i)]) - m) / sigma;
                rank_mu += weights[i] * y.transpose() * y;
            }
            cov = (1.0 - c_mu) * cov + c_mu * rank_mu;
            cov = 0.5 * (cov + cov.transpose().eval());
            m = m_new;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd basis = eig.eigenvectors();
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd z(d);
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        out.decisions.row(i) = m + sigma * (basis * scale.cwiseProduct(z).eval()).transpose();
    }
    repair_all(p, out);

    out.shared_aux[mean_key] = m;
    out.shared_aux[state_key + "cov"] = cov;
    out.shared_aux[state_key + "sigma"] = Eigen::MatrixXd::Constant(1, 1, sigma);
    out.shared_aux[state_key + "path"] = path;
    return out;
}

// ---------------------------------------------------------------------------
// update
// ---------------------------------------------------------------------------

inline void require_evaluated(const SolutionSet& s, const char* who) {
    if (!s.all_evaluated())
        throw std::invalid_argument(std::string(who) + ": input must be fully evaluated");
}

inline SolutionSet update_always(const SolutionSet& s, const SolutionSet& s_new) {
    std::vector<std::pair<int, std::size_t>> picks;
    for (int i = 0; i < s_new.size(); ++i) picks.emplace_back(1, static_cast<std::size_t>(i));
    return gather(s, s_new, picks);
}

inline SolutionSet update_greedy(const SolutionSet& s, const SolutionSet& s_new) {
    require_evaluated(s, "update_greedy");
    require_evaluated(s_new, "update_greedy");
    std::vector<std::pair<int, std::size_t>> all;
    for (int i = 0; i < s.size(); ++i) all.emplace_back(0, static_cast<std::size_t>(i));
    for (int i = 0; i < s_new.size(); ++i) all.emplace_back(1, static_cast<std::size_t>(i));
    std::stable_sort(all.begin(), all.end(), [&](const auto& x, const auto& y) {
        const double fx = (x.first == 0 ? s : s_new).fitness[static_cast<int>(x.second)];
        const double fy = (y.first == 0 ? s : s_new).fitness[static_cast<int>(y.second)];
        return fx < fy;
    });
    all.resize(static_cast<std::size_t>(s.size()));
    return gather(s, s_new, all);
}

inline SolutionSet update_pairwise(const SolutionSet& s, const SolutionSet& s_new) {
    require_evaluated(s, "update_pairwise");
    require_evaluated(s_new, "update_pairwise");
    if (s.size() != s_new.size())
        throw std::invalid_argument("update_pairwise: population sizes differ");
    std::vector<std::pair<int, std::size_t>> picks;
    for (int i = 0; i < s.size(); ++i)
        picks.emplace_back(s_new.fitness[i] < s.fitness[i] ? 1 : 0, static_cast<std::size_t>(i));
    return gather(s, s_new, picks);
}

inline SolutionSet update_round_robin(const SolutionSet& s, const SolutionSet& s_new, int opponents,
                                      Rng& rng) {
    require_evaluated(s, "update_round_robin");
    require_evaluated(s_new, "update_round_robin");
    std::vector<std::pair<int, std::size_t>> pool;
    for (int i = 0; i < s.size(); ++i) pool.emplace_back(0, static_cast<std::size_t>(i));
    for (int i = 0; i < s_new.size(); ++i) pool.emplace_back(1, static_cast<std::size_t>(i));
    const auto fit = [&](const std::pair<int, std::size_t>& e) {
        return (e.first == 0 ? s : s_new).fitness[static_cast<int>(e.second)];
    };
    std::vector<int> wins(pool.size(), 0);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (int g = 0; g < opponents; ++g) {
            const std::size_t opp = rng.index(pool.size());
            if (fit(pool[i]) < fit(pool[opp])) ++wins[i];
        }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (wins[a] != wins[b]) return wins[a] > wins[b];
        return fit(pool[a]) < fit(pool[b]);
    });
    std::vector<std::pair<int, std::size_t>> picks;
    for (int i = 0; i < s.size(); ++i) picks.push_back(pool[order[static_cast<std::size_t>(i)]]);
    return gather(s, s_new, picks);
}

// Metropolis acceptance per slot; the temperature lives in shared aux and is
// scaled on first use to the population's fitness spread.
inline SolutionSet update_simulated_annealing(const SolutionSet& s, const SolutionSet& s_new,
                                              double temperature, double cooling, Rng& rng,
                                              const std::string& state_key) {
    require_evaluated(s, "update_simulated_annealing");
    require_evaluated(s_new, "update_simulated_annealing");
    if (s.size() != s_new.size())
        throw std::invalid_argument("update_simulated_annealing: population sizes differ");

    const auto temp_key = state_key + "sa_temperature";
    double t;
    if (s.shared_aux.count(temp_key) || s_new.shared_aux.count(temp_key)) {
        const auto& store = s_new.shared_aux.count(temp_key) ? s_new.shared_aux : s.shared_aux;
        t = store.at(temp_key)(0, 0);
    } else {
        const double mean = s.fitness.mean();
        const double spread =
            std::sqrt((s.fitness.array() - mean).square().sum() / std::max(1, s.size()));
        t = temperature * std::max(spread, 1e-12);
    }

    std::vector<std::pair<int, std::size_t>> picks;
    for (int i = 0; i < s.size(); ++i) {
        const double delta = s_new.fitness[i] - s.fitness[i];
        const bool accept = delta <= 0.0 || rng.chance(std::exp(-delta / t));
        picks.emplace_back(accept ? 1 : 0, static_cast<std::size_t>(i));
    }
    SolutionSet out = gather(s, s_new, picks);
    out.shared_aux[temp_key] = Eigen::MatrixXd::Constant(1, 1, t * cooling);
    return out;
}

} // namespace ops

// ---------------------------------------------------------------------------
// uniform apply contract
// ---------------------------------------------------------------------------

inline SolutionSet apply(const OperatorCatalogEntry& entry, OperatorIO& io) {
    ops::check_params(entry, io.params);
    if (!io.rng) throw std::invalid_argument("apply: rng required");
    if (entry.role != Role::update && entry.role != Role::choose && !io.problem)
        throw std::invalid_argument("apply: problem required for search operators");
    if (io.problem && !entry.available_for(io.problem->kind()))
        throw std::invalid_argument(entry.op_id + ": not available for " +
                                    to_string(io.problem->kind()) + " problems");
    if (entry.arity == Arity::pair && io.population.size() < 2)
        throw std::invalid_argument(entry.op_id + ": needs at least two parents");

    Rng& rng = *io.rng;
    const auto& s = io.population;
    const auto& pr = io.params;

    const std::string& id = entry.op_id;
    if (id == "choose_traverse") return ops::choose_traverse(s);
    if (id == "choose_roulette_wheel") return ops::choose_roulette_wheel(s, rng);
    if (id == "choose_tournament") return ops::choose_tournament(s, ops::int_param(pr[0]), rng);
    if (id == "choose_cluster") return ops::choose_cluster(s, ops::int_param(pr[0]), rng);

    const Problem& p = *io.problem;
    // crossovers recombine in-bounds parents; SBX can still overshoot, so all
    // of them go through the same clamp-to-bounds repair
    const auto repaired = [&p](SolutionSet out) {
        ops::repair_all(p, out);
        return out;
    };
    if (id == "cross_arithmetic") return repaired(ops::cross_arithmetic(s, pr[0], rng));
    if (id == "cross_sim_binary") return repaired(ops::cross_sim_binary(s, pr[0], pr[1], rng));
    if (id == "cross_point_one") return repaired(ops::cross_points(s, pr[0], 1, rng));
    if (id == "cross_point_two") return repaired(ops::cross_points(s, pr[0], 2, rng));
    if (id == "cross_point_n")
        return repaired(ops::cross_points(s, pr[0], ops::int_param(pr[1]), rng));
    if (id == "cross_point_uniform") return repaired(ops::cross_point_uniform(s, pr[0], rng));
    if (id == "search_cma") return ops::search_cma(s, p, pr[0], rng, io.state_key);
    if (id == "search_eda") return ops::search_eda(s, p, pr[0], rng, io.state_key);
    if (id == "search_mu_cauchy") return ops::search_mu_cauchy(s, p, pr[0], pr[1], rng);
    if (id == "search_mu_gaussian") return ops::search_mu_gaussian(s, p, pr[0], pr[1], rng);
    if (id == "search_mu_polynomial") return ops::search_mu_polynomial(s, p, pr[0], pr[1], rng);
    if (id == "search_mu_uniform") return ops::search_mu_uniform(s, p, pr[0], rng);
    if (id == "search_pso") return ops::search_pso(s, p, pr[0], pr[1], pr[2], rng);
    if (id == "search_de_random")
        return ops::search_de(s, p, ops::DeVariant::random_1, pr[0], pr[1], rng);
    if (id == "search_de_current")
        return ops::search_de(s, p, ops::DeVariant::current_1, pr[0], pr[1], rng);
    if (id == "search_de_current_best")
        return ops::search_de(s, p, ops::DeVariant::current_to_best_1, pr[0], pr[1], rng);
    if (id == "reinit_continuous") return ops::reinit_continuous(s, p, rng);
    if (id == "search_reset_one") return ops::search_reset_one(s, p, rng);
    if (id == "search_reset_rand") return ops::search_reset_rand(s, p, pr[0], rng);
    if (id == "search_reset_creep") return ops::search_reset_creep(s, p, pr[0], rng);
    if (id == "reinit_discrete") return ops::reinit_discrete(s, p, rng);

    const auto& sn = io.offspring;
    if (id == "update_always") return ops::update_always(s, sn);
    if (id == "update_greedy") return ops::update_greedy(s, sn);
    if (id == "update_pairwise") return ops::update_pairwise(s, sn);
    if (id == "update_round_robin") return ops::update_round_robin(s, sn, ops::int_param(pr[0]), rng);
    if (id == "update_simulated_annealing")
        return ops::update_simulated_annealing(s, sn, pr[0], pr[1], rng, io.state_key);

    throw std::invalid_argument("unknown operator: " + id);
}

// Explicit-state wrapper for the stateful search operators: injects the given
// state under the operator's aux keys, applies one generation, and returns the
// advanced state alongside the offspring.
inline std::pair<SolutionSet, std::map<std::string, Eigen::MatrixXd>> stateful_search_step(
    const OperatorCatalogEntry& entry, OperatorIO io,
    const std::map<std::string, Eigen::MatrixXd>& state) {
    const bool row_level = entry.op_id == "search_pso";
    for (const auto& key : entry.needs_aux) {
        auto it = state.find(key);
        if (it == state.end()) continue;
        if (row_level)
            io.population.row_aux[it->first] = it->second;
        else
            io.population.shared_aux[io.state_key + it->first] = it->second;
    }
    SolutionSet out = apply(entry, io);
    std::map<std::string, Eigen::MatrixXd> next;
    for (const auto& key : entry.needs_aux) {
        if (row_level) {
            auto it = out.row_aux.find(key);
            if (it != out.row_aux.end()) next[key] = it->second;
        } else {
            auto it = out.shared_aux.find(io.state_key + key);
            if (it != out.shared_aux.end()) next[key] = it->second;
        }
    }
    return {std::move(out), std::move(next)};
}

} // namespace autoopt
