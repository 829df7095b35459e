#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "autoopt/rng.hpp"

namespace autoopt {

enum class Kind { continuous, discrete };
enum class Direction { minimize, maximize };

inline const char* to_string(Kind k) { return k == Kind::continuous ? "continuous" : "discrete"; }

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalBudget {
    long long limit = 0;
    long long used = 0;
    long long remaining() const { return limit - used; }
};

// A set of candidate solutions plus whatever per-solution or population-level
// state the running algorithm has attached to them.
struct SolutionSet {
    Eigen::MatrixXd decisions;                          // N x D
    Eigen::VectorXd fitness;                            // N, valid where evaluated
    std::vector<char> evaluated;                        // N flags
    std::map<std::string, Eigen::MatrixXd> row_aux;     // per-solution state, N rows each
    std::map<std::string, Eigen::MatrixXd> shared_aux;  // population-level state

    SolutionSet() = default;
    SolutionSet(int n, int d)
        : decisions(Eigen::MatrixXd::Zero(n, d)),
          fitness(Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN())),
          evaluated(static_cast<std::size_t>(n), 0) {}

    int size() const { return static_cast<int>(decisions.rows()); }
    int dim() const { return static_cast<int>(decisions.cols()); }

    bool all_evaluated() const {
        for (char e : evaluated)
            if (!e) return false;
        return true;
    }

    void mark_unevaluated() {
        for (auto& e : evaluated) e = 0;
    }

    int best_index() const {
        int best = -1;
        for (int i = 0; i < size(); ++i) {
            if (!evaluated[static_cast<std::size_t>(i)]) continue;
            if (best < 0 || fitness[i] < fitness[best]) best = i;
        }
        return best;
    }

    // Gather rows into a new set; per-row aux travels with its row, shared
    // state is copied wholesale.
    SolutionSet pick(const std::vector<std::size_t>& rows) const {
        SolutionSet out(static_cast<int>(rows.size()), dim());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.decisions.row(static_cast<int>(i)) = decisions.row(static_cast<int>(rows[i]));
            out.fitness[static_cast<int>(i)] = fitness[static_cast<int>(rows[i])];
            out.evaluated[i] = evaluated[rows[i]];
        }
        for (const auto& [key, mat] : row_aux) {
            Eigen::MatrixXd m(rows.size(), mat.cols());
            for (std::size_t i = 0; i < rows.size(); ++i)
                m.row(static_cast<int>(i)) = mat.row(static_cast<int>(rows[i]));
            out.row_aux[key] = std::move(m);
        }
        out.shared_aux = shared_aux;
        return out;
    }
};

// Gather rows from two sets (old population and offspring). pick.first selects
// the source (0 = a, 1 = b); per-row aux missing on one side is zero-filled.
inline SolutionSet gather(const SolutionSet& a, const SolutionSet& b,
                          const std::vector<std::pair<int, std::size_t>>& picks) {
    SolutionSet out(static_cast<int>(picks.size()), a.dim());
    for (std::size_t i = 0; i < picks.size(); ++i) {
        const SolutionSet& src = picks[i].first == 0 ? a : b;
        const auto r = static_cast<int>(picks[i].second);
        out.decisions.row(static_cast<int>(i)) = src.decisions.row(r);
        out.fitness[static_cast<int>(i)] = src.fitness[r];
        out.evaluated[i] = src.evaluated[picks[i].second];
    }
    std::map<std::string, int> widths;
    for (const auto& [k, m] : a.row_aux) widths[k] = static_cast<int>(m.cols());
    for (const auto& [k, m] : b.row_aux) {
        auto it = widths.find(k);
        if (it != widths.end() && it->second != m.cols())
            throw std::runtime_error("row_aux width mismatch for key '" + k + "'");
        widths[k] = static_cast<int>(m.cols());
    }
    for (const auto& [key, w] : widths) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<int>(picks.size()), w);
        for (std::size_t i = 0; i < picks.size(); ++i) {
            const SolutionSet& src = picks[i].first == 0 ? a : b;
            auto it = src.row_aux.find(key);
            if (it != src.row_aux.end())
                m.row(static_cast<int>(i)) = it->second.row(static_cast<int>(picks[i].second));
        }
        out.row_aux[key] = std::move(m);
    }
    out.shared_aux = a.shared_aux;
    for (const auto& [k, m] : b.shared_aux) out.shared_aux[k] = m;  // offspring state wins
    return out;
}

// ---------------------------------------------------------------------------
// Shifted continuous benchmarks f1..f10
// ---------------------------------------------------------------------------

enum class BenchmarkFn {
    sphere,
    schwefel_1_2,
    elliptic,
    schwefel_1_2_noisy,
    schwefel_2_6,
    rosenbrock,
    griewank,
    ackley,
    rastrigin,
};

struct ProblemSpec {
    std::string id;
    Kind kind = Kind::continuous;
    int dimension = 0;
    Eigen::VectorXd lower, upper;  // continuous bounds
    std::vector<int> alphabet;     // discrete: per-variable alphabet size
    double bias = 0.0;
    Eigen::VectorXd shift;  // continuous: optimum location
    std::uint64_t seed = 0;
    Direction direction = Direction::minimize;
    BenchmarkFn fn = BenchmarkFn::sphere;
    Eigen::MatrixXd linear_system;  // schwefel_2_6 only: the A matrix
};

namespace detail {

// f4's multiplicative noise must be a pure function of the shifted point so
// that evaluation stays deterministic and translation-invariant.
inline double noise_factor(const Eigen::VectorXd& z) {
    const std::uint64_t h = fnv1a64(z.data(), static_cast<std::size_t>(z.size()) * sizeof(double));
    Rng r(h);
    return 1.0 + 0.4 * std::abs(r.normal());
}

inline double base_function(BenchmarkFn fn, const Eigen::VectorXd& z,
                            const Eigen::MatrixXd& linear_system) {
    const int d = static_cast<int>(z.size());
    switch (fn) {
        case BenchmarkFn::sphere:
            return z.squaredNorm();
        case BenchmarkFn::schwefel_1_2: {
            double total = 0.0, prefix = 0.0;
            for (int i = 0; i < d; ++i) {
                prefix += z[i];
                total += prefix * prefix;
            }
            return total;
        }
        case BenchmarkFn::elliptic: {
            double total = 0.0;
            for (int i = 0; i < d; ++i) {
                const double expo = d > 1 ? static_cast<double>(i) / (d - 1) : 0.0;
                total += std::pow(1e6, expo) * z[i] * z[i];
            }
            return total;
        }
        case BenchmarkFn::schwefel_1_2_noisy:
            return base_function(BenchmarkFn::schwefel_1_2, z, linear_system) * noise_factor(z);
        case BenchmarkFn::schwefel_2_6:
            return (linear_system * z).cwiseAbs().maxCoeff();
        case BenchmarkFn::rosenbrock: {
            double total = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const double a = z[i] + 1.0, b = z[i + 1] + 1.0;  // optimum stays at z = 0
                total += 100.0 * (a * a - b) * (a * a - b) + (a - 1.0) * (a - 1.0);
            }
            return total;
        }
        case BenchmarkFn::griewank: {
            double sum = 0.0, prod = 1.0;
            for (int i = 0; i < d; ++i) {
                sum += z[i] * z[i];
                prod *= std::cos(z[i] / std::sqrt(static_cast<double>(i + 1)));
            }
            return 1.0 + sum / 4000.0 - prod;
        }
        case BenchmarkFn::ackley: {
            const double q = z.squaredNorm() / d;
            double c = 0.0;
            for (int i = 0; i < d; ++i) c += std::cos(2.0 * std::numbers::pi * z[i]);
            return -20.0 * std::exp(-0.2 * std::sqrt(q)) - std::exp(c / d) + 20.0 +
                   std::numbers::e;
        }
        case BenchmarkFn::rastrigin: {
            double total = 0.0;
            for (int i = 0; i < d; ++i)
                total += z[i] * z[i] - 10.0 * std::cos(2.0 * std::numbers::pi * z[i]) + 10.0;
            return total;
        }
    }
    throw std::logic_error("unhandled benchmark function");
}

struct BenchmarkDef {
    BenchmarkFn fn;
    double bound;  // symmetric box [-bound, bound]
    double bias;
};

inline const std::map<std::string, BenchmarkDef>& benchmark_defs() {
    static const std::map<std::string, BenchmarkDef> defs = {
        {"f1", {BenchmarkFn::sphere, 100.0, -450.0}},
        {"f2", {BenchmarkFn::schwefel_1_2, 100.0, -450.0}},
        {"f3", {BenchmarkFn::elliptic, 100.0, -450.0}},
        {"f4", {BenchmarkFn::schwefel_1_2_noisy, 100.0, -450.0}},
        {"f5", {BenchmarkFn::schwefel_2_6, 100.0, -310.0}},
        {"f6", {BenchmarkFn::rosenbrock, 100.0, 390.0}},
        {"f7", {BenchmarkFn::griewank, 600.0, -180.0}},
        {"f8", {BenchmarkFn::ackley, 32.0, -140.0}},
        {"f9", {BenchmarkFn::rastrigin, 5.0, -330.0}},
        {"f10", {BenchmarkFn::rastrigin, 5.0, -330.0}},
    };
    return defs;
}

} // namespace detail

// Builds one continuous benchmark instance. The shift (optimum location) is
// drawn uniformly inside [0.8*lb, 0.8*ub] from the seed, so the instance is a
// pure function of (id, dimension, seed).
inline ProblemSpec make_benchmark(const std::string& id, int dimension, std::uint64_t seed) {
    if (dimension <= 0) throw std::invalid_argument("benchmark dimension must be positive");
    const auto& defs = detail::benchmark_defs();
    auto it = defs.find(id);
    if (it == defs.end()) throw std::invalid_argument("unknown benchmark id: " + id);
    const auto& def = it->second;

    ProblemSpec spec;
    spec.id = id;
    spec.kind = Kind::continuous;
    spec.dimension = dimension;
    spec.lower = Eigen::VectorXd::Constant(dimension, -def.bound);
    spec.upper = Eigen::VectorXd::Constant(dimension, def.bound);
    spec.bias = def.bias;
    spec.seed = seed;
    spec.fn = def.fn;

    Rng rng(derive_seed(seed, fnv1a64(id), static_cast<std::uint64_t>(dimension)));
    spec.shift.resize(dimension);
    for (int i = 0; i < dimension; ++i)
        spec.shift[i] = rng.uniform(0.8 * spec.lower[i], 0.8 * spec.upper[i]);

    if (def.fn == BenchmarkFn::schwefel_2_6) {
        spec.linear_system.resize(dimension, dimension);
        for (int r = 0; r < dimension; ++r)
            for (int c = 0; c < dimension; ++c)
                spec.linear_system(r, c) = static_cast<double>(rng.integer(-500, 500));
        // keep the system comfortably non-singular
        for (int r = 0; r < dimension; ++r)
            if (spec.linear_system.row(r).cwiseAbs().sum() < 1.0) spec.linear_system(r, r) = 1.0;
    }
    return spec;
}

inline double evaluate_benchmark(const ProblemSpec& spec, const Eigen::VectorXd& x) {
    const Eigen::VectorXd z = x - spec.shift;
    return detail::base_function(spec.fn, z, spec.linear_system) + spec.bias;
}

// ---------------------------------------------------------------------------
// Uniform problem facade
// ---------------------------------------------------------------------------

class Problem {
public:
    struct Impl {
        virtual ~Impl() = default;
        virtual const std::string& id() const = 0;
        virtual Kind kind() const = 0;
        virtual int dimension() const = 0;
        virtual double lower(int i) const = 0;
        virtual double upper(int i) const = 0;
        virtual int alphabet(int i) const = 0;
        virtual Direction direction() const = 0;
        virtual double objective(const Eigen::VectorXd& x) const = 0;
    };

    Problem() = default;
    explicit Problem(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    bool valid() const { return impl_ != nullptr; }
    const std::string& id() const { return impl_->id(); }
    Kind kind() const { return impl_->kind(); }
    int dimension() const { return impl_->dimension(); }
    double lower(int i) const { return impl_->lower(i); }
    double upper(int i) const { return impl_->upper(i); }
    int alphabet(int i) const { return impl_->alphabet(i); }
    Direction direction() const { return impl_->direction(); }

    // objective value normalized to minimization
    double evaluate_point(const Eigen::VectorXd& x) const {
        const double v = impl_->objective(x);
        return impl_->direction() == Direction::minimize ? v : -v;
    }

    static Problem benchmark(const std::string& id, int dimension, std::uint64_t seed) {
        return Problem(std::make_shared<BenchmarkImpl>(make_benchmark(id, dimension, seed)));
    }
    static Problem from_spec(ProblemSpec spec) {
        return Problem(std::make_shared<BenchmarkImpl>(std::move(spec)));
    }
    static Problem custom(std::string id, Kind kind, int dimension, double lower, double upper,
                          std::vector<int> alphabet,
                          std::function<double(const Eigen::VectorXd&)> fn,
                          Direction dir = Direction::minimize) {
        auto impl = std::make_shared<CustomImpl>();
        impl->id_ = std::move(id);
        impl->kind_ = kind;
        impl->dim_ = dimension;
        impl->lower_ = lower;
        impl->upper_ = upper;
        impl->alphabet_ = std::move(alphabet);
        impl->fn_ = std::move(fn);
        impl->dir_ = dir;
        return Problem(std::move(impl));
    }

    const ProblemSpec* spec() const {
        auto p = dynamic_cast<const BenchmarkImpl*>(impl_.get());
        return p ? &p->spec : nullptr;
    }

    const std::shared_ptr<const Impl>& impl() const { return impl_; }

private:
    struct BenchmarkImpl : Impl {
        explicit BenchmarkImpl(ProblemSpec s) : spec(std::move(s)) {}
        ProblemSpec spec;
        const std::string& id() const override { return spec.id; }
        Kind kind() const override { return spec.kind; }
        int dimension() const override { return spec.dimension; }
        double lower(int i) const override {
            return spec.kind == Kind::continuous ? spec.lower[i] : 0.0;
        }
        double upper(int i) const override {
            return spec.kind == Kind::continuous ? spec.upper[i]
                                                 : static_cast<double>(spec.alphabet[static_cast<std::size_t>(i)] - 1);
        }
        int alphabet(int i) const override {
            return spec.kind == Kind::discrete ? spec.alphabet[static_cast<std::size_t>(i)] : 0;
        }
        Direction direction() const override { return spec.direction; }
        double objective(const Eigen::VectorXd& x) const override {
            return evaluate_benchmark(spec, x);
        }
    };

    struct CustomImpl : Impl {
        std::string id_;
        Kind kind_ = Kind::continuous;
        int dim_ = 0;
        double lower_ = 0.0, upper_ = 0.0;
        std::vector<int> alphabet_;
        std::function<double(const Eigen::VectorXd&)> fn_;
        Direction dir_ = Direction::minimize;
        const std::string& id() const override { return id_; }
        Kind kind() const override { return kind_; }
        int dimension() const override { return dim_; }
        double lower(int i) const override { return kind_ == Kind::discrete ? 0.0 : lower_; }
        double upper(int i) const override {
            return kind_ == Kind::discrete ? static_cast<double>(alphabet_[static_cast<std::size_t>(i)] - 1)
                                           : upper_;
        }
        int alphabet(int i) const override {
            return kind_ == Kind::discrete ? alphabet_[static_cast<std::size_t>(i)] : 0;
        }
        Direction direction() const override { return dir_; }
        double objective(const Eigen::VectorXd& x) const override { return fn_(x); }
    };

    std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline void check_row_bounds(const Problem& p, const Eigen::VectorXd& x, int row) {
    for (int j = 0; j < p.dimension(); ++j) {
        if (p.kind() == Kind::discrete) {
            const double r = std::round(x[j]);
            if (x[j] != r || r < 0.0 || r > p.upper(j))
                throw std::out_of_range("decision out of alphabet at row " + std::to_string(row) +
                                        ", column " + std::to_string(j));
        } else if (x[j] < p.lower(j) || x[j] > p.upper(j)) {
            throw std::out_of_range("decision out of bounds at row " + std::to_string(row) +
                                    ", column " + std::to_string(j));
        }
    }
}

} // namespace detail

// Fills fitness for every not-yet-evaluated row. Returns the number of newly
// evaluated rows. Pure in (problem, decisions): already-evaluated rows are
// never touched.
inline int evaluate(const Problem& problem, SolutionSet& s) {
    if (s.dim() != problem.dimension())
        throw std::invalid_argument("solution dimension does not match problem");
    int fresh = 0;
    for (int i = 0; i < s.size(); ++i) {
        if (s.evaluated[static_cast<std::size_t>(i)]) continue;
        const Eigen::VectorXd x = s.decisions.row(i);
        detail::check_row_bounds(problem, x, i);
        s.fitness[i] = problem.evaluate_point(x);
        s.evaluated[static_cast<std::size_t>(i)] = 1;
        ++fresh;
    }
    return fresh;
}

// Budget-enforcing variant: refuses the batch if it would overrun the budget.
inline int evaluate(const Problem& problem, SolutionSet& s, EvalBudget& budget) {
    int pending = 0;
    for (char e : s.evaluated)
        if (!e) ++pending;
    if (budget.used + pending > budget.limit)
        throw BudgetExceeded("evaluation budget exceeded: " + std::to_string(budget.used) + "+" +
                             std::to_string(pending) + " > " + std::to_string(budget.limit));
    const int fresh = evaluate(problem, s);
    budget.used += fresh;
    return fresh;
}

// Uniform-random population inside the problem's box / alphabets.
inline SolutionSet sample_uniform(const Problem& p, int n, Rng& rng) {
    SolutionSet s(n, p.dimension());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p.dimension(); ++j)
            s.decisions(i, j) = p.kind() == Kind::discrete
                                    ? static_cast<double>(rng.integer(0, p.alphabet(j) - 1))
                                    : rng.uniform(p.lower(j), p.upper(j));
    return s;
}

// Clamp a decision vector into the problem's box; discrete values are rounded
// to the nearest alphabet letter.
template <typename Row>
void repair(const Problem& p, Row&& x) {
    for (int j = 0; j < p.dimension(); ++j) {
        if (p.kind() == Kind::discrete) {
            x[j] = std::min(std::max(std::round(x[j]), 0.0), p.upper(j));
        } else {
            x[j] = std::min(std::max(x[j], p.lower(j)), p.upper(j));
        }
    }
}

} // namespace autoopt
