#include <catch_amalgamated.hpp>

#include "autoopt/problem.hpp"

using namespace autoopt;

namespace {

const std::vector<std::string> kAllBenchmarks = {"f1", "f2", "f3", "f4", "f5",
                                                 "f6", "f7", "f8", "f9", "f10"};

SolutionSet single_row(const Eigen::VectorXd& x) {
    SolutionSet s(1, static_cast<int>(x.size()));
    s.decisions.row(0) = x;
    return s;
}

} // namespace

TEST_CASE("optimum sits at the shift with value equal to the bias") {
    for (const auto& id : kAllBenchmarks) {
        const auto spec = make_benchmark(id, 10, 1);
        const double at_shift = evaluate_benchmark(spec, spec.shift);
        INFO(id);
        REQUIRE(at_shift == Catch::Approx(spec.bias).margin(1e-12));
    }
}

TEST_CASE("published bias values") {
    REQUIRE(make_benchmark("f1", 10, 1).bias == -450.0);
    REQUIRE(make_benchmark("f5", 10, 1).bias == -310.0);
    REQUIRE(make_benchmark("f6", 10, 1).bias == 390.0);
    REQUIRE(make_benchmark("f7", 10, 1).bias == -180.0);
    REQUIRE(make_benchmark("f8", 10, 1).bias == -140.0);
    REQUIRE(make_benchmark("f9", 10, 1).bias == -330.0);
}

TEST_CASE("sphere one step off the optimum") {
    // moving every coordinate by 1 adds exactly D to the sphere sum
    const auto spec = make_benchmark("f1", 10, 1);
    const Eigen::VectorXd x = spec.shift + Eigen::VectorXd::Ones(10);
    REQUIRE(evaluate_benchmark(spec, x) == Catch::Approx(spec.bias + 10.0).margin(1e-12));
}

TEST_CASE("rastrigin at the shift collapses every term") {
    const auto spec = make_benchmark("f9", 10, 1);
    REQUIRE(evaluate_benchmark(spec, spec.shift) == Catch::Approx(-330.0).margin(1e-12));
}

TEST_CASE("evaluation translates with the shift") {
    Rng rng(5);
    for (const auto& id : kAllBenchmarks) {
        const auto spec = make_benchmark(id, 8, 3);
        ProblemSpec unshifted = spec;
        unshifted.shift.setZero();
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd x(8);
            for (int j = 0; j < 8; ++j) x[j] = rng.uniform(0.8 * spec.lower[j], 0.8 * spec.upper[j]);
            INFO(id);
            REQUIRE(evaluate_benchmark(spec, x) ==
                    evaluate_benchmark(unshifted, Eigen::VectorXd(x - spec.shift)));
        }
    }
}

TEST_CASE("instance data is a pure function of id, dimension and seed") {
    for (const auto& id : kAllBenchmarks) {
        const auto a = make_benchmark(id, 30, 77);
        const auto b = make_benchmark(id, 30, 77);
        REQUIRE(a.shift == b.shift);
        REQUIRE(a.linear_system == b.linear_system);
        const auto c = make_benchmark(id, 30, 78);
        REQUIRE(a.shift != c.shift);
    }
}

TEST_CASE("make_benchmark rejects bad arguments") {
    REQUIRE_THROWS_AS(make_benchmark("f99", 10, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_benchmark("f1", 0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_benchmark("f1", -3, 1), std::invalid_argument);
}

TEST_CASE("evaluate fills fitness and counts fresh rows") {
    const auto p = Problem::benchmark("f1", 4, 9);
    SolutionSet s(3, 4);
    for (int i = 0; i < 3; ++i) s.decisions.row(i) = p.spec()->shift;
    REQUIRE(evaluate(p, s) == 3);
    REQUIRE(s.all_evaluated());
    for (int i = 0; i < 3; ++i) REQUIRE(s.fitness[i] == Catch::Approx(-450.0));
    REQUIRE(evaluate(p, s) == 0);  // repeated evaluation never changes anything
}

TEST_CASE("evaluation is pure") {
    const auto p = Problem::benchmark("f7", 6, 2);
    Rng rng(4);
    SolutionSet a = sample_uniform(p, 8, rng);
    SolutionSet b = a;
    evaluate(p, a);
    evaluate(p, b);
    REQUIRE(a.fitness == b.fitness);
}

TEST_CASE("out-of-bounds decisions are reported with their index") {
    const auto p = Problem::benchmark("f1", 3, 1);
    SolutionSet s(2, 3);
    s.decisions.row(0) = p.spec()->shift.head(3);
    s.decisions(1, 2) = 1e6;
    try {
        evaluate(p, s);
        FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("row 1") != std::string::npos);
        REQUIRE(msg.find("column 2") != std::string::npos);
    }
}

TEST_CASE("budget-enforcing evaluate refuses an overrunning batch") {
    const auto p = Problem::benchmark("f1", 3, 1);
    Rng rng(8);
    SolutionSet s = sample_uniform(p, 5, rng);
    EvalBudget budget{4, 0};
    REQUIRE_THROWS_AS(evaluate(p, s, budget), BudgetExceeded);
    budget.limit = 5;
    REQUIRE(evaluate(p, s, budget) == 5);
    REQUIRE(budget.used == 5);
}

TEST_CASE("maximize problems are negated to minimization") {
    const auto p = Problem::custom("inverted", Kind::continuous, 2, -1, 1, {},
                                   [](const Eigen::VectorXd& x) { return x.sum(); },
                                   Direction::maximize);
    Eigen::VectorXd x(2);
    x << 0.25, 0.5;
    REQUIRE(p.evaluate_point(x) == Catch::Approx(-0.75));
}

TEST_CASE("discrete bounds checking enforces the alphabet") {
    const auto p = Problem::custom("latt", Kind::discrete, 2, 0, 0, {4, 4},
                                   [](const Eigen::VectorXd& x) { return x.sum(); });
    SolutionSet ok(1, 2);
    ok.decisions << 3, 0;
    REQUIRE(evaluate(p, ok) == 1);
    SolutionSet frac(1, 2);
    frac.decisions << 1.5, 0;
    REQUIRE_THROWS_AS(evaluate(p, frac), std::out_of_range);
    SolutionSet big(1, 2);
    big.decisions << 4, 0;
    REQUIRE_THROWS_AS(evaluate(p, big), std::out_of_range);
}

TEST_CASE("pick and gather carry per-row aux state with the row") {
    SolutionSet s(3, 2);
    s.decisions << 1, 1, 2, 2, 3, 3;
    s.fitness << 10, 20, 30;
    for (auto& e : s.evaluated) e = 1;
    Eigen::MatrixXd vel(3, 2);
    vel << 0.1, 0.1, 0.2, 0.2, 0.3, 0.3;
    s.row_aux["velocity"] = vel;
    const auto picked = s.pick({2, 0});
    REQUIRE(picked.decisions(0, 0) == 3);
    REQUIRE(picked.row_aux.at("velocity")(0, 0) == Catch::Approx(0.3));
    REQUIRE(picked.row_aux.at("velocity")(1, 0) == Catch::Approx(0.1));

    SolutionSet other(3, 2);
    other.decisions.setConstant(7);
    other.fitness << 1, 2, 3;
    for (auto& e : other.evaluated) e = 1;
    const auto merged = gather(s, other, {{0, 1}, {1, 0}});
    REQUIRE(merged.decisions(0, 0) == 2);
    REQUIRE(merged.decisions(1, 0) == 7);
    REQUIRE(merged.row_aux.at("velocity")(0, 0) == Catch::Approx(0.2));
    REQUIRE(merged.row_aux.at("velocity")(1, 0) == 0.0);  // zero-filled for the other source
}

TEST_CASE("noisy variant stays deterministic and keeps its optimum") {
    const auto spec = make_benchmark("f4", 10, 6);
    REQUIRE(evaluate_benchmark(spec, spec.shift) == Catch::Approx(spec.bias).margin(1e-12));
    Eigen::VectorXd x = spec.shift;
    x[0] += 3.0;
    REQUIRE(evaluate_benchmark(spec, x) == evaluate_benchmark(spec, x));
    REQUIRE(evaluate_benchmark(spec, x) > spec.bias);
}
