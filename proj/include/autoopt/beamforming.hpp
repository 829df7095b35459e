#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "autoopt/problem.hpp"
#include "autoopt/rng.hpp"

namespace autoopt {

// RIS-aided downlink system: a BS with num_antennas antennas serves num_users
// single-antenna users through a surface of num_elements reflecting elements,
// each with a bits-bit discrete phase shift. Active beamformers are fixed to
// maximum-ratio transmission on the direct channel with an equal power split,
// so the decision variables are the phase indices only.
struct BeamformInstance {
    int num_users = 0;     // K
    int num_antennas = 0;  // M
    int num_elements = 0;  // N
    int bits = 1;          // b
    double transmit_power = 1.0;
    double noise_power = 1.0;
    Eigen::MatrixXcd direct;       // M x K, column k = h_d,k
    Eigen::MatrixXcd bs_to_ris;    // N x M, G
    Eigen::MatrixXcd ris_to_user;  // N x K, column k = h_r,k
    Eigen::MatrixXcd beamformers;  // M x K, column k = w_k
    std::uint64_t seed = 0;

    int phase_levels() const { return 1 << bits; }
};

inline BeamformInstance make_beamform(int num_users, int num_antennas, int num_elements, int bits,
                                      double transmit_power, double noise_power,
                                      std::uint64_t seed) {
    if (num_users < 1 || num_antennas < 1 || num_elements < 1 || bits < 1)
        throw std::invalid_argument("beamform sizes must be >= 1");
    if (transmit_power <= 0.0 || noise_power <= 0.0)
        throw std::invalid_argument("beamform powers must be positive");

    BeamformInstance inst;
    inst.num_users = num_users;
    inst.num_antennas = num_antennas;
    inst.num_elements = num_elements;
    inst.bits = bits;
    inst.transmit_power = transmit_power;
    inst.noise_power = noise_power;
    inst.seed = seed;

    Rng rng(derive_seed(seed, fnv1a64("beamform")));
    auto draw = [&rng](Eigen::MatrixXcd& m, int rows, int cols) {
        m.resize(rows, cols);
        const double s = 1.0 / std::sqrt(2.0);  // CN(0,1) components
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) m(r, c) = {rng.normal() * s, rng.normal() * s};
    };
    draw(inst.direct, num_antennas, num_users);
    draw(inst.bs_to_ris, num_elements, num_antennas);
    draw(inst.ris_to_user, num_elements, num_users);

    // MRT on the direct channel, equal power split across users
    inst.beamformers.resize(num_antennas, num_users);
    const double per_user = std::sqrt(transmit_power / num_users);
    for (int k = 0; k < num_users; ++k) {
        const double norm = inst.direct.col(k).norm();
        inst.beamformers.col(k) =
            norm > 0.0 ? Eigen::MatrixXcd(per_user * inst.direct.col(k) / norm)
                       : Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(num_antennas, 1));
    }
    return inst;
}

// Sum over users of log2(1 + SINR_k) under the given phase indices.
inline double sum_rate(const BeamformInstance& inst, const Eigen::VectorXd& phase_indices) {
    if (phase_indices.size() != inst.num_elements)
        throw std::invalid_argument("phase vector length mismatch");
    Eigen::VectorXcd theta(inst.num_elements);
    const int levels = inst.phase_levels();
    for (int n = 0; n < inst.num_elements; ++n) {
        const double idx = std::round(phase_indices[n]);
        if (idx != phase_indices[n] || idx < 0 || idx >= levels)
            throw std::out_of_range("phase index out of alphabet at element " + std::to_string(n));
        const double phi = idx * 2.0 * std::numbers::pi / levels;
        theta[n] = std::polar(1.0, phi);
    }

    // effective row channel per user: h_d,k^H + h_r,k^H * diag(theta) * G
    Eigen::MatrixXcd effective(inst.num_users, inst.num_antennas);
    for (int k = 0; k < inst.num_users; ++k) {
        const Eigen::RowVectorXcd reflected =
            (inst.ris_to_user.col(k).conjugate().cwiseProduct(theta)).transpose() * inst.bs_to_ris;
        effective.row(k) = inst.direct.col(k).adjoint() + reflected;
    }

    double rate = 0.0;
    for (int k = 0; k < inst.num_users; ++k) {
        double signal = 0.0, interference = 0.0;
        for (int j = 0; j < inst.num_users; ++j) {
            const std::complex<double> s = (effective.row(k) * inst.beamformers.col(j)).value();
            if (j == k)
                signal = std::norm(s);
            else
                interference += std::norm(s);
        }
        rate += std::log2(1.0 + signal / (interference + inst.noise_power));
    }
    return rate;
}

// Minimization fitness: reciprocal of the sum rate.
inline double beamform_fitness(const BeamformInstance& inst, const Eigen::VectorXd& phase_indices) {
    return 1.0 / sum_rate(inst, phase_indices);
}

namespace detail {

struct BeamformProblemImpl : Problem::Impl {
    explicit BeamformProblemImpl(BeamformInstance inst) : instance(std::move(inst)) {
        id_ = "beamform_N" + std::to_string(instance.num_elements) + "_b" +
              std::to_string(instance.bits);
    }
    BeamformInstance instance;
    std::string id_;

    const std::string& id() const override { return id_; }
    Kind kind() const override { return Kind::discrete; }
    int dimension() const override { return instance.num_elements; }
    double lower(int) const override { return 0.0; }
    double upper(int) const override { return instance.phase_levels() - 1; }
    int alphabet(int) const override { return instance.phase_levels(); }
    Direction direction() const override { return Direction::minimize; }
    double objective(const Eigen::VectorXd& x) const override {
        return beamform_fitness(instance, x);
    }
};

} // namespace detail

inline Problem beamform_problem(BeamformInstance inst) {
    return Problem(std::make_shared<detail::BeamformProblemImpl>(std::move(inst)));
}

// facade escape hatch for the reference beamforming procedures
inline const BeamformInstance* beamform_instance_of(const Problem& p) {
    auto impl = std::dynamic_pointer_cast<const detail::BeamformProblemImpl>(p.impl());
    return impl ? &impl->instance : nullptr;
}

// ---------------------------------------------------------------------------
// Channel export/import (plain text, exact round-trip)
// ---------------------------------------------------------------------------

namespace detail {

inline void write_cmatrix(std::ostream& os, const Eigen::MatrixXcd& m) {
    os << m.rows() << " " << m.cols() << "\n";
    char buf[64];
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g", m(r, c).real(), m(r, c).imag());
            os << buf << (c + 1 == m.cols() ? "" : " ");
        }
        os << "\n";
    }
}

inline Eigen::MatrixXcd read_cmatrix(std::istream& is) {
    int rows = 0, cols = 0;
    if (!(is >> rows >> cols)) throw std::runtime_error("malformed channel file: matrix header");
    Eigen::MatrixXcd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double re = 0.0, im = 0.0;
            if (!(is >> re >> im)) throw std::runtime_error("malformed channel file: matrix body");
            m(r, c) = {re, im};
        }
    return m;
}

} // namespace detail

inline void save_beamform(const BeamformInstance& inst, std::ostream& os) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g %.17g", inst.transmit_power, inst.noise_power);
    os << "beamform " << inst.num_users << " " << inst.num_antennas << " " << inst.num_elements
       << " " << inst.bits << " " << buf << " " << inst.seed << "\n";
    detail::write_cmatrix(os, inst.direct);
    detail::write_cmatrix(os, inst.bs_to_ris);
    detail::write_cmatrix(os, inst.ris_to_user);
    detail::write_cmatrix(os, inst.beamformers);
}

inline BeamformInstance load_beamform(std::istream& is) {
    std::string tag;
    BeamformInstance inst;
    if (!(is >> tag) || tag != "beamform")
        throw std::runtime_error("malformed channel file: missing header tag");
    if (!(is >> inst.num_users >> inst.num_antennas >> inst.num_elements >> inst.bits >>
          inst.transmit_power >> inst.noise_power >> inst.seed))
        throw std::runtime_error("malformed channel file: header fields");
    inst.direct = detail::read_cmatrix(is);
    inst.bs_to_ris = detail::read_cmatrix(is);
    inst.ris_to_user = detail::read_cmatrix(is);
    inst.beamformers = detail::read_cmatrix(is);
    return inst;
}

inline void save_beamform_file(const BeamformInstance& inst, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    save_beamform(inst, os);
}

inline BeamformInstance load_beamform_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load_beamform(is);
}

} // namespace autoopt
