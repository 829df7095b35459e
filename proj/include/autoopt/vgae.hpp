#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoopt/catalog.hpp"
#include "autoopt/graph_encoding.hpp"
#include "autoopt/rng.hpp"

namespace autoopt {

struct VgaeConfig {
    int hidden_dim = 32;
    int latent_dim = 20;
    int epochs = 200;
    double learning_rate = 0.01;
    double kl_weight = 1.0;
    double attr_weight = 0.1;
    std::uint64_t seed = 0;
};

// One graph as the auto-encoder sees it: raw adjacency, node features, and the
// attribute vector the linear head reconstructs.
struct VgaeInput {
    Eigen::MatrixXd adjacency;   // n x n, 0/1
    Eigen::MatrixXd features;    // n x input_dim
    Eigen::VectorXd attr_target; // attr_dim
};

struct VgaeLoss {
    double total = 0.0;
    double reconstruction = 0.0;
    double kl = 0.0;
    double attribute = 0.0;
};

// Two-layer GCN encoder to per-node (mu, log sigma), reparameterized sample,
// inner-product edge decoder plus a linear attribute head.
struct VGAEModel {
    Eigen::MatrixXd w1;        // input_dim x hidden
    Eigen::MatrixXd w_mu;      // hidden x latent
    Eigen::MatrixXd w_logsig;  // hidden x latent
    Eigen::MatrixXd w_attr;    // latent x attr_dim
    Eigen::RowVectorXd b_attr; // attr_dim
    VgaeConfig config;
    std::vector<double> loss_trace;  // mean total loss per epoch

    int input_dim() const { return static_cast<int>(w1.rows()); }
    int hidden_dim() const { return static_cast<int>(w1.cols()); }
    int latent_dim() const { return static_cast<int>(w_mu.cols()); }
    int attr_dim() const { return static_cast<int>(w_attr.cols()); }
};

namespace vgae_detail {

// symmetrize, add self loops, degree-normalize
inline Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    Eigen::MatrixXd s = ((a + a.transpose()).array() > 0.0).cast<double>();
    s += Eigen::MatrixXd::Identity(n, n);
    s = (s.array() > 0.0).cast<double>();
    Eigen::VectorXd d = s.rowwise().sum().cwiseMax(1.0).cwiseSqrt().cwiseInverse();
    return d.asDiagonal() * s * d.asDiagonal();
}

inline Eigen::MatrixXd reconstruction_target(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    Eigen::MatrixXd t = ((a + a.transpose()).array() > 0.0).cast<double>();
    t += Eigen::MatrixXd::Identity(n, n);
    return (t.array() > 0.0).cast<double>();
}

inline double bce_with_logits(double logit, double target) {
    return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

struct Forward {
    Eigen::MatrixXd ahat, target;
    Eigen::MatrixXd p1;      // ahat * x
    Eigen::MatrixXd h_pre, h, b;
    Eigen::MatrixXd mu, log_sig, sig, z;
    Eigen::RowVectorXd pooled, attr_pred;
    VgaeLoss loss;
};

// noise == nullptr means deterministic encoding (z = mu)
inline Forward forward(const VGAEModel& m, const VgaeInput& in, const Eigen::MatrixXd* noise) {
    if (in.features.cols() != m.input_dim())
        throw std::invalid_argument("vgae: feature dimension mismatch");
    if (in.attr_target.size() != m.attr_dim())
        throw std::invalid_argument("vgae: attribute dimension mismatch");

    Forward f;
    const auto n = in.adjacency.rows();
    f.ahat = normalize_adjacency(in.adjacency);
    f.target = reconstruction_target(in.adjacency);
    f.p1 = f.ahat * in.features;
    f.h_pre = f.p1 * m.w1;
    f.h = f.h_pre.cwiseMax(0.0);
    f.b = f.ahat * f.h;
    f.mu = f.b * m.w_mu;
    f.log_sig = f.b * m.w_logsig;
    f.sig = f.log_sig.array().exp();
    f.z = noise ? Eigen::MatrixXd(f.mu + f.sig.cwiseProduct(*noise)) : f.mu;

    const Eigen::MatrixXd logits = f.z * f.z.transpose();
    double rec = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) rec += bce_with_logits(logits(i, j), f.target(i, j));
    f.loss.reconstruction = rec / static_cast<double>(n * n);

    f.loss.kl = 0.5 *
                (f.mu.array().square() + f.sig.array().square() - 1.0 -
                 2.0 * f.log_sig.array())
                    .sum() /
                static_cast<double>(n);

    f.pooled = f.z.colwise().mean();
    f.attr_pred = f.pooled * m.w_attr + m.b_attr;
    f.loss.attribute =
        (f.attr_pred.transpose() - in.attr_target).squaredNorm() / m.attr_dim();

    f.loss.total = f.loss.reconstruction + m.config.kl_weight * f.loss.kl +
                   m.config.attr_weight * f.loss.attribute;
    return f;
}

struct Gradients {
    Eigen::MatrixXd w1, w_mu, w_logsig, w_attr;
    Eigen::RowVectorXd b_attr;

    void setZero(const VGAEModel& m) {
        w1 = Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols());
        w_mu = Eigen::MatrixXd::Zero(m.w_mu.rows(), m.w_mu.cols());
        w_logsig = Eigen::MatrixXd::Zero(m.w_logsig.rows(), m.w_logsig.cols());
        w_attr = Eigen::MatrixXd::Zero(m.w_attr.rows(), m.w_attr.cols());
        b_attr = Eigen::RowVectorXd::Zero(m.b_attr.cols());
    }
    void accumulate(const Gradients& g, double scale) {
        w1 += scale * g.w1;
        w_mu += scale * g.w_mu;
        w_logsig += scale * g.w_logsig;
        w_attr += scale * g.w_attr;
        b_attr += scale * g.b_attr;
    }
};

inline Gradients backward(const VGAEModel& m, const VgaeInput& in, const Forward& f,
                          const Eigen::MatrixXd* noise) {
    const auto n = in.adjacency.rows();
    Gradients g;

    const Eigen::MatrixXd logits = f.z * f.z.transpose();
    const Eigen::MatrixXd probs = logits.unaryExpr([](double v) {
        return 1.0 / (1.0 + std::exp(-v));
    });
    const Eigen::MatrixXd d_logits = (probs - f.target) / static_cast<double>(n * n);
    Eigen::MatrixXd d_z = (d_logits + d_logits.transpose()) * f.z;

    const Eigen::RowVectorXd d_attr_pred = m.config.attr_weight * 2.0 *
                                           (f.attr_pred - in.attr_target.transpose()) /
                                           static_cast<double>(m.attr_dim());
    g.w_attr = f.pooled.transpose() * d_attr_pred;
    g.b_attr = d_attr_pred;
    const Eigen::RowVectorXd d_pooled = d_attr_pred * m.w_attr.transpose();
    d_z.rowwise() += d_pooled / static_cast<double>(n);

    Eigen::MatrixXd d_mu = d_z + m.config.kl_weight * f.mu / static_cast<double>(n);
    Eigen::MatrixXd d_sig =
        m.config.kl_weight *
        (f.sig.array() - f.sig.array().inverse()).matrix() / static_cast<double>(n);
    if (noise) d_sig += d_z.cwiseProduct(*noise);
    const Eigen::MatrixXd d_logsig = d_sig.cwiseProduct(f.sig);

    g.w_mu = f.b.transpose() * d_mu;
    g.w_logsig = f.b.transpose() * d_logsig;

    const Eigen::MatrixXd d_b = d_mu * m.w_mu.transpose() + d_logsig * m.w_logsig.transpose();
    const Eigen::MatrixXd d_h = f.ahat.transpose() * d_b;
    const Eigen::MatrixXd d_h_pre =
        d_h.cwiseProduct((f.h_pre.array() > 0.0).cast<double>().matrix());
    g.w1 = f.p1.transpose() * d_h_pre;
    return g;
}

inline Eigen::MatrixXd glorot(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
    return m;
}

} // namespace vgae_detail

inline VGAEModel vgae_init(int input_dim, int attr_dim, const VgaeConfig& config) {
    Rng rng(derive_seed(config.seed, fnv1a64("vgae-init")));
    VGAEModel m;
    m.config = config;
    m.w1 = vgae_detail::glorot(input_dim, config.hidden_dim, rng);
    m.w_mu = vgae_detail::glorot(config.hidden_dim, config.latent_dim, rng);
    m.w_logsig = vgae_detail::glorot(config.hidden_dim, config.latent_dim, rng);
    m.w_attr = vgae_detail::glorot(config.latent_dim, attr_dim, rng);
    m.b_attr = Eigen::RowVectorXd::Zero(attr_dim);
    return m;
}

inline VgaeLoss vgae_loss(const VGAEModel& m, const VgaeInput& in,
                          const Eigen::MatrixXd* noise = nullptr) {
    return vgae_detail::forward(m, in, noise).loss;
}

// Full-batch gradient descent; reparameterization noise is redrawn per epoch
// from the seeded stream. Throws if the loss leaves the reals.
inline VGAEModel vgae_train(const std::vector<VgaeInput>& inputs, const VgaeConfig& config) {
    if (inputs.size() < 2) throw std::invalid_argument("vgae_train needs at least 2 samples");
    const int input_dim = static_cast<int>(inputs.front().features.cols());
    const int attr_dim = static_cast<int>(inputs.front().attr_target.size());
    for (const auto& in : inputs)
        if (in.features.cols() != input_dim || in.attr_target.size() != attr_dim)
            throw std::invalid_argument("vgae_train: inconsistent sample dimensions");

    VGAEModel model = vgae_init(input_dim, attr_dim, config);
    Rng noise_rng(derive_seed(config.seed, fnv1a64("vgae-noise")));
    const double scale = 1.0 / static_cast<double>(inputs.size());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        vgae_detail::Gradients total;
        total.setZero(model);
        double epoch_loss = 0.0;
        for (const auto& in : inputs) {
            Eigen::MatrixXd noise(in.adjacency.rows(), config.latent_dim);
            for (Eigen::Index r = 0; r < noise.rows(); ++r)
                for (int c = 0; c < config.latent_dim; ++c) noise(r, c) = noise_rng.normal();
            const auto f = vgae_detail::forward(model, in, &noise);
            epoch_loss += f.loss.total;
            total.accumulate(vgae_detail::backward(model, in, f, &noise), scale);
        }
        epoch_loss *= scale;
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("vgae_train: loss became non-finite at epoch " +
                                     std::to_string(epoch));
        model.w1 -= config.learning_rate * total.w1;
        model.w_mu -= config.learning_rate * total.w_mu;
        model.w_logsig -= config.learning_rate * total.w_logsig;
        model.w_attr -= config.learning_rate * total.w_attr;
        model.b_attr -= config.learning_rate * total.b_attr;
        model.loss_trace.push_back(epoch_loss);
    }
    return model;
}

// Deterministic graph-level embedding: mean pool of the node mu vectors.
inline Eigen::VectorXd embed(const VGAEModel& m, const VgaeInput& in) {
    const auto f = vgae_detail::forward(m, in, nullptr);
    return f.mu.colwise().mean().transpose();
}

// Node features for an encoded graph: one-hot operator identity next to that
// operator's own attribute slots. Slots are scaled by their catalog range so
// the features live on the adjacency's 0/1 scale (eta-style parameters would
// otherwise dwarf everything and destabilize training).
inline VgaeInput encoding_to_input(const GraphEncoding& enc, const Catalog& catalog) {
    const auto n = static_cast<Eigen::Index>(catalog.size());
    const auto attr_len = static_cast<Eigen::Index>(catalog.attribute_length());
    VgaeInput in;
    in.adjacency = enc.adjacency;
    in.features = Eigen::MatrixXd::Zero(n, n + attr_len);
    in.attr_target = Eigen::VectorXd::Zero(attr_len);
    for (Eigen::Index i = 0; i < n; ++i) {
        in.features(i, i) = 1.0;
        const auto& entry = catalog.entry(static_cast<std::size_t>(i));
        const auto offset = catalog.attribute_offset(static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < entry.params.size(); ++k) {
            const auto& p = entry.params[k];
            const double scale = std::max({1.0, std::abs(p.min), std::abs(p.max)});
            const auto slot = static_cast<Eigen::Index>(offset + k);
            const double value = enc.attributes[slot] / scale;
            in.features(i, n + slot) = value;
            in.attr_target[slot] = value;
        }
    }
    return in;
}

inline Eigen::VectorXd embed(const VGAEModel& m, const GraphEncoding& enc, const Catalog& catalog) {
    return embed(m, encoding_to_input(enc, catalog));
}

// ---------------------------------------------------------------------------
// model save/load (plain text)
// ---------------------------------------------------------------------------

namespace vgae_detail {

inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    os << m.rows() << " " << m.cols() << "\n";
    char buf[40];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            os << buf << (c + 1 == m.cols() ? "" : " ");
        }
        os << "\n";
    }
}

inline Eigen::MatrixXd read_matrix(std::istream& is) {
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> rows >> cols)) throw std::runtime_error("malformed model file: matrix header");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            if (!(is >> m(r, c))) throw std::runtime_error("malformed model file: matrix body");
    return m;
}

} // namespace vgae_detail

inline void save_vgae(const VGAEModel& m, std::ostream& os) {
    os << "vgae " << m.config.hidden_dim << " " << m.config.latent_dim << " " << m.config.epochs
       << " " << m.config.learning_rate << " " << m.config.kl_weight << " " << m.config.attr_weight
       << " " << m.config.seed << "\n";
    vgae_detail::write_matrix(os, m.w1);
    vgae_detail::write_matrix(os, m.w_mu);
    vgae_detail::write_matrix(os, m.w_logsig);
    vgae_detail::write_matrix(os, m.w_attr);
    vgae_detail::write_matrix(os, m.b_attr);
}

inline VGAEModel load_vgae(std::istream& is) {
    std::string tag;
    VGAEModel m;
    if (!(is >> tag) || tag != "vgae") throw std::runtime_error("malformed model file: header");
    if (!(is >> m.config.hidden_dim >> m.config.latent_dim >> m.config.epochs >>
          m.config.learning_rate >> m.config.kl_weight >> m.config.attr_weight >> m.config.seed))
        throw std::runtime_error("malformed model file: config");
    m.w1 = vgae_detail::read_matrix(is);
    m.w_mu = vgae_detail::read_matrix(is);
    m.w_logsig = vgae_detail::read_matrix(is);
    m.w_attr = vgae_detail::read_matrix(is);
    m.b_attr = vgae_detail::read_matrix(is);
    return m;
}

} // namespace autoopt
