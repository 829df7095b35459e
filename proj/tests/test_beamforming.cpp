#include <catch_amalgamated.hpp>

#include "autoopt/beamforming.hpp"

#include <complex>
#include <sstream>

using namespace autoopt;

namespace {

// independent single-user sum-rate: everything scalarized by hand
double oracle_rate_1user(const BeamformInstance& inst, int phase_index) {
    using cd = std::complex<double>;
    REQUIRE(inst.num_users == 1);
    REQUIRE(inst.num_elements == 1);
    const double phi = phase_index * 2.0 * std::numbers::pi / inst.phase_levels();
    const cd theta = std::polar(1.0, phi);
    cd acc = 0.0;
    for (int m = 0; m < inst.num_antennas; ++m) {
        const cd direct = std::conj(inst.direct(m, 0));
        const cd reflected = std::conj(inst.ris_to_user(0, 0)) * theta * inst.bs_to_ris(0, m);
        acc += (direct + reflected) * inst.beamformers(m, 0);
    }
    const double snr = std::norm(acc) / inst.noise_power;
    return std::log2(1.0 + snr);
}

} // namespace

TEST_CASE("equal-split MRT saturates the power constraint") {
    const auto inst = make_beamform(2, 4, 120, 1, 1.0, 0.1, 7);
    double total = 0.0;
    for (int k = 0; k < inst.num_users; ++k) total += inst.beamformers.col(k).squaredNorm();
    REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("same seed reproduces the channels bit for bit") {
    const auto a = make_beamform(2, 4, 8, 2, 1.0, 0.1, 99);
    const auto b = make_beamform(2, 4, 8, 2, 1.0, 0.1, 99);
    REQUIRE(a.direct == b.direct);
    REQUIRE(a.bs_to_ris == b.bs_to_ris);
    REQUIRE(a.ris_to_user == b.ris_to_user);
    REQUIRE(a.beamformers == b.beamformers);
}

TEST_CASE("single-element fitness matches the hand formula") {
    const auto inst = make_beamform(1, 1, 1, 1, 1.0, 0.5, 3);
    for (int tau = 0; tau < 2; ++tau) {
        Eigen::VectorXd phases(1);
        phases << tau;
        REQUIRE(sum_rate(inst, phases) == Catch::Approx(oracle_rate_1user(inst, tau)).margin(1e-12));
        REQUIRE(beamform_fitness(inst, phases) ==
                Catch::Approx(1.0 / oracle_rate_1user(inst, tau)).margin(1e-12));
        REQUIRE(beamform_fitness(inst, phases) > 0.0);
    }
}

TEST_CASE("two-level element: evaluate agrees with exhaustive search") {
    const auto inst = make_beamform(1, 1, 1, 1, 1.0, 0.5, 11);
    const auto p = beamform_problem(inst);
    SolutionSet s(2, 1);
    s.decisions << 0, 1;
    evaluate(p, s);
    const double brute = std::min(1.0 / oracle_rate_1user(inst, 0), 1.0 / oracle_rate_1user(inst, 1));
    REQUIRE(std::min(s.fitness[0], s.fitness[1]) == Catch::Approx(brute).margin(1e-12));
}

TEST_CASE("four-level element: argmin matches exhaustive argmin") {
    const auto inst = make_beamform(1, 1, 1, 2, 1.0, 0.5, 13);
    const auto p = beamform_problem(inst);
    SolutionSet s(4, 1);
    for (int tau = 0; tau < 4; ++tau) s.decisions(tau, 0) = tau;
    evaluate(p, s);
    int best = 0;
    for (int tau = 1; tau < 4; ++tau)
        if (s.fitness[tau] < s.fitness[best]) best = tau;
    int oracle_best = 0;
    double oracle_val = std::numeric_limits<double>::infinity();
    for (int tau = 0; tau < 4; ++tau) {
        Eigen::VectorXd phases(1);
        phases << tau;
        const double f = beamform_fitness(inst, phases);
        if (f < oracle_val) {
            oracle_val = f;
            oracle_best = tau;
        }
    }
    REQUIRE(best == oracle_best);
}

TEST_CASE("repeated evaluation is pure") {
    const auto inst = make_beamform(2, 3, 5, 2, 2.0, 0.2, 21);
    Eigen::VectorXd phases(5);
    phases << 0, 3, 1, 2, 0;
    REQUIRE(beamform_fitness(inst, phases) == beamform_fitness(inst, phases));
}

TEST_CASE("phase indices outside the alphabet are rejected") {
    const auto inst = make_beamform(1, 2, 3, 1, 1.0, 0.1, 5);
    Eigen::VectorXd phases(3);
    phases << 0, 1, 2;  // 2 is out of a 1-bit alphabet
    REQUIRE_THROWS_AS(beamform_fitness(inst, phases), std::out_of_range);
    phases << 0, 0.5, 1;
    REQUIRE_THROWS_AS(beamform_fitness(inst, phases), std::out_of_range);
}

TEST_CASE("make_beamform rejects invalid sizes") {
    REQUIRE_THROWS_AS(make_beamform(0, 1, 1, 1, 1.0, 0.1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_beamform(1, 1, 1, 0, 1.0, 0.1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_beamform(1, 1, 1, 1, 0.0, 0.1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_beamform(1, 1, 1, 1, 1.0, -1.0, 1), std::invalid_argument);
}

TEST_CASE("channel files round-trip exactly") {
    const auto inst = make_beamform(2, 4, 6, 2, 1.5, 0.3, 31);
    std::ostringstream os;
    save_beamform(inst, os);
    std::istringstream is(os.str());
    const auto loaded = load_beamform(is);
    REQUIRE(loaded.direct == inst.direct);
    REQUIRE(loaded.bs_to_ris == inst.bs_to_ris);
    REQUIRE(loaded.ris_to_user == inst.ris_to_user);
    REQUIRE(loaded.beamformers == inst.beamformers);
    REQUIRE(loaded.transmit_power == inst.transmit_power);
    Eigen::VectorXd phases = Eigen::VectorXd::Zero(6);
    REQUIRE(beamform_fitness(loaded, phases) == beamform_fitness(inst, phases));
}

TEST_CASE("malformed channel text is rejected") {
    std::istringstream empty("");
    REQUIRE_THROWS(load_beamform(empty));
    std::istringstream wrong("notbeamform 1 1 1 1 1 0.1 0");
    REQUIRE_THROWS(load_beamform(wrong));
}

TEST_CASE("problem facade exposes the discrete alphabet") {
    const auto p = beamform_problem(make_beamform(2, 2, 4, 2, 1.0, 0.1, 17));
    REQUIRE(p.kind() == Kind::discrete);
    REQUIRE(p.dimension() == 4);
    REQUIRE(p.alphabet(0) == 4);
    REQUIRE(p.upper(0) == 3.0);
    REQUIRE(beamform_instance_of(p) != nullptr);
}
