#include <catch_amalgamated.hpp>

#include "autoopt/graph_moves.hpp"
#include "autoopt/vgae.hpp"

#include <sstream>

using namespace autoopt;

namespace {

const Catalog& kCont = Catalog::for_kind(Kind::continuous);

VgaeInput toy_input(int nodes, int input_dim, int attr_dim, std::uint64_t seed) {
    Rng rng(seed);
    VgaeInput in;
    in.adjacency = Eigen::MatrixXd::Zero(nodes, nodes);
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j)
            if (i != j && rng.chance(0.35)) in.adjacency(i, j) = 1.0;
    in.features.resize(nodes, input_dim);
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < input_dim; ++j) in.features(i, j) = rng.uniform(-1, 1);
    in.attr_target.resize(attr_dim);
    for (int j = 0; j < attr_dim; ++j) in.attr_target[j] = rng.uniform(-1, 1);
    return in;
}

VGAEModel toy_model(int input_dim, int attr_dim, const VgaeConfig& cfg, std::uint64_t seed) {
    VgaeConfig c = cfg;
    c.seed = seed;
    return vgae_init(input_dim, attr_dim, c);
}

double model_loss(VGAEModel& m, const VgaeInput& in, const Eigen::MatrixXd& noise) {
    return vgae_loss(m, in, &noise).total;
}

} // namespace

TEST_CASE("zero weights give the closed-form losses") {
    // mu = 0 and sigma = 1 everywhere: KL vanishes, logits vanish, and every
    // decoded edge probability is exactly one half
    VgaeConfig cfg;
    cfg.hidden_dim = 4;
    cfg.latent_dim = 3;
    VGAEModel m = toy_model(5, 2, cfg, 1);
    m.w1.setZero();
    m.w_mu.setZero();
    m.w_logsig.setZero();
    m.w_attr.setZero();
    m.b_attr.setZero();
    const auto in = toy_input(6, 5, 2, 2);
    const auto loss = vgae_loss(m, in);
    REQUIRE(loss.kl == 0.0);
    REQUIRE(loss.reconstruction == Catch::Approx(std::log(2.0)).margin(1e-15));
    REQUIRE(loss.attribute == Catch::Approx(in.attr_target.squaredNorm() / 2.0));
}

TEST_CASE("kl term is nonnegative for arbitrary weights") {
    VgaeConfig cfg;
    cfg.hidden_dim = 6;
    cfg.latent_dim = 4;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        VGAEModel m = toy_model(4, 3, cfg, seed);
        m.w_mu *= 5.0;
        m.w_logsig *= 3.0;
        const auto in = toy_input(5, 4, 3, 100 + seed);
        REQUIRE(vgae_loss(m, in).kl >= 0.0);
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    VgaeConfig cfg;
    cfg.hidden_dim = 4;
    cfg.latent_dim = 3;
    cfg.kl_weight = 1.0;
    cfg.attr_weight = 0.1;
    VGAEModel m = toy_model(3, 2, cfg, 7);
    const auto in = toy_input(5, 3, 2, 8);  // 5-node toy graph
    Rng noise_rng(9);
    Eigen::MatrixXd noise(5, 3);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 3; ++j) noise(i, j) = noise_rng.normal();

    const auto f = vgae_detail::forward(m, in, &noise);
    const auto grads = vgae_detail::backward(m, in, f, &noise);

    const double h = 1e-6;
    double max_rel = 0.0;
    const auto check = [&](Eigen::MatrixXd& w, const Eigen::MatrixXd& g) {
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                const double keep = w(r, c);
                w(r, c) = keep + h;
                const double up = model_loss(m, in, noise);
                w(r, c) = keep - h;
                const double down = model_loss(m, in, noise);
                w(r, c) = keep;
                const double fd = (up - down) / (2.0 * h);
                const double rel =
                    std::abs(fd - g(r, c)) / std::max({1.0, std::abs(fd), std::abs(g(r, c))});
                max_rel = std::max(max_rel, rel);
            }
    };
    check(m.w1, grads.w1);
    check(m.w_mu, grads.w_mu);
    check(m.w_logsig, grads.w_logsig);
    check(m.w_attr, grads.w_attr);
    {
        Eigen::MatrixXd b = m.b_attr;
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
            const double keep = m.b_attr(0, c);
            m.b_attr(0, c) = keep + h;
            const double up = model_loss(m, in, noise);
            m.b_attr(0, c) = keep - h;
            const double down = model_loss(m, in, noise);
            m.b_attr(0, c) = keep;
            const double fd = (up - down) / (2.0 * h);
            const double rel = std::abs(fd - grads.b_attr(0, c)) /
                               std::max({1.0, std::abs(fd), std::abs(grads.b_attr(0, c))});
            max_rel = std::max(max_rel, rel);
        }
    }
    REQUIRE(max_rel < 1e-4);
}

TEST_CASE("training loss decreases on random graph encodings") {
    Rng rng(11);
    std::vector<VgaeInput> inputs;
    for (int i = 0; i < 30; ++i)
        inputs.push_back(encoding_to_input(encode(random_graph(kCont, rng), kCont), kCont));
    VgaeConfig cfg;
    cfg.epochs = 60;
    cfg.seed = 12;
    const auto model = vgae_train(inputs, cfg);
    REQUIRE(model.loss_trace.size() == 60);
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 10; ++i) {
        first += model.loss_trace[i];
        last += model.loss_trace[model.loss_trace.size() - 10 + i];
    }
    REQUIRE(last / 10.0 < first / 10.0);
}

TEST_CASE("training needs at least two consistent samples") {
    Rng rng(13);
    std::vector<VgaeInput> one{encoding_to_input(encode(random_graph(kCont, rng), kCont), kCont)};
    VgaeConfig cfg;
    REQUIRE_THROWS_AS(vgae_train(one, cfg), std::invalid_argument);
    auto two = one;
    two.push_back(toy_input(4, 3, 2, 14));  // inconsistent dims
    REQUIRE_THROWS_AS(vgae_train(two, cfg), std::invalid_argument);
}

TEST_CASE("a runaway learning rate reports the failing epoch") {
    Rng rng(15);
    std::vector<VgaeInput> inputs;
    for (int i = 0; i < 4; ++i)
        inputs.push_back(encoding_to_input(encode(random_graph(kCont, rng), kCont), kCont));
    VgaeConfig cfg;
    cfg.epochs = 60;
    cfg.learning_rate = 1e9;
    cfg.seed = 16;
    try {
        vgae_train(inputs, cfg);
        FAIL("expected non-finite loss");
    } catch (const std::runtime_error& e) {
        REQUIRE(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("embedding is deterministic, 20-dimensional, and discriminative") {
    Rng rng(17);
    std::vector<VgaeInput> inputs;
    std::vector<GraphEncoding> encodings;
    for (int i = 0; i < 40; ++i) {
        encodings.push_back(encode(random_graph(kCont, rng), kCont));
        inputs.push_back(encoding_to_input(encodings.back(), kCont));
    }
    VgaeConfig cfg;
    cfg.epochs = 40;
    cfg.seed = 18;
    const auto model = vgae_train(inputs, cfg);

    const auto e0 = embed(model, inputs[0]);
    REQUIRE(e0.size() == 20);
    REQUIRE(embed(model, inputs[0]) == e0);
    REQUIRE(embed(model, encodings[0], kCont) == e0);

    // structurally different graphs map to different embeddings
    int collisions = 0, pairs = 0;
    std::vector<Eigen::VectorXd> embeddings;
    for (const auto& in : inputs) embeddings.push_back(embed(model, in));
    for (std::size_t i = 0; i < embeddings.size(); ++i)
        for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
            ++pairs;
            if ((embeddings[i] - embeddings[j]).norm() < 1e-12) ++collisions;
        }
    REQUIRE(collisions * 100 < pairs);
    REQUIRE(20 * 10 < static_cast<int>(encodings[0].raw_dimension()));
}

TEST_CASE("dimension mismatches are rejected") {
    VgaeConfig cfg;
    cfg.hidden_dim = 4;
    cfg.latent_dim = 3;
    VGAEModel m = toy_model(6, 2, cfg, 19);
    const auto wrong = toy_input(5, 4, 2, 20);
    REQUIRE_THROWS_AS(vgae_loss(m, wrong), std::invalid_argument);
    const auto wrong_attr = toy_input(5, 6, 3, 21);
    REQUIRE_THROWS_AS(vgae_loss(m, wrong_attr), std::invalid_argument);
}

TEST_CASE("models round-trip through the text format") {
    Rng rng(22);
    std::vector<VgaeInput> inputs;
    for (int i = 0; i < 5; ++i)
        inputs.push_back(encoding_to_input(encode(random_graph(kCont, rng), kCont), kCont));
    VgaeConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 23;
    const auto model = vgae_train(inputs, cfg);
    std::ostringstream os;
    save_vgae(model, os);
    std::istringstream is(os.str());
    const auto loaded = load_vgae(is);
    REQUIRE(loaded.w1 == model.w1);
    REQUIRE(loaded.w_mu == model.w_mu);
    REQUIRE(embed(loaded, inputs[0]) == embed(model, inputs[0]));
}
