#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rotornav/errors.hpp"
#include "rotornav/flight_gen.hpp"
#include "rotornav/rng.hpp"
#include "rotornav/spectral.hpp"
#include "rotornav/trainer.hpp"

using namespace rotornav;

namespace {

InputVector rand_input(Rng& rng) {
    InputVector in;
    for (int i = 0; i < 3; ++i) in.prev_position[i] = rng.uniform(-1.5, 1.5);
    for (int i = 0; i < 4; ++i) in.rpm_normalized[i] = rng.uniform(0, 1);
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) q[i] = rng.uniform(-1, 1);
    in.orientation = q.normalized();
    return in;
}

// Warm a copy of the network with a few steps so memory states are nonzero.
void warm(MnnNetwork& net, Rng& rng, int steps) {
    for (int i = 0; i < steps; ++i) (void)net.forward(rand_input(rng));
}

double loss_at(const MnnNetwork& net, const Eigen::VectorXd& input,
               const Eigen::VectorXd& target) {
    MnnNetwork scratch = net;
    const Eigen::VectorXd out = scratch.forward(input);
    return 0.5 * (out - target).squaredNorm();
}

std::vector<Sequence> hover_sequences(double duration_s) {
    TrajectoryPlan plan;
    plan.kind = PlanKind::Hover;
    plan.duration_s = duration_s;
    const FlightLog log = generate_flight(plan, UavParams{});
    return build_dataset({log}, 0).train;
}

}  // namespace

TEST_CASE("truncated backprop matches central finite differences") {
    Rng rng(100);
    for (int trial = 0; trial < 12; ++trial) {
        const int hidden = 4 + static_cast<int>(rng.next_u64() % 8);
        MnnNetwork net = init_weights({11, hidden, 3}, 1.0 + rng.uniform(0, 2),
                                      rng.next_u64());
        for (MnnLayer& layer : net.layers()) {
            for (Eigen::Index i = 0; i < layer.alpha.size(); ++i) {
                layer.alpha[i] = rng.uniform(0, 1);
            }
        }
        warm(net, rng, 3);

        const Eigen::VectorXd input = rand_input(rng).to_vector();
        Eigen::VectorXd target(3);
        for (int i = 0; i < 3; ++i) target[i] = rng.uniform(-1, 1);

        const GradResult grads = loss_gradients(net, input, target);
        const double h = 1e-6;

        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto check_entries = [&](Eigen::MatrixXd& m, const Eigen::MatrixXd& analytic) {
                for (int rep = 0; rep < 6; ++rep) {
                    const Eigen::Index r = rng.next_u64() % m.rows();
                    const Eigen::Index c = rng.next_u64() % m.cols();
                    const double orig = m(r, c);
                    m(r, c) = orig + h;
                    const double up = loss_at(net, input, target);
                    m(r, c) = orig - h;
                    const double dn = loss_at(net, input, target);
                    m(r, c) = orig;
                    const double fd = (up - dn) / (2 * h);
                    const double got = analytic(r, c);
                    CHECK(std::abs(fd - got) <=
                          1e-5 * std::max({std::abs(fd), std::abs(got), 1e-4}));
                }
            };
            check_entries(net.layers()[l].W, grads.layers[l].dW);
            check_entries(net.layers()[l].Q, grads.layers[l].dQ);

            // Alpha follows the same truncated rule.
            for (int rep = 0; rep < 3; ++rep) {
                const Eigen::Index i = rng.next_u64() % net.layers()[l].alpha.size();
                double& a = net.layers()[l].alpha[i];
                const double orig = a;
                const double ha = std::min({1e-6, orig, 1.0 - orig});
                if (ha <= 0.0) continue;
                a = orig + ha;
                const double up = loss_at(net, input, target);
                a = orig - ha;
                const double dn = loss_at(net, input, target);
                a = orig;
                const double fd = (up - dn) / (2 * ha);
                const double got = grads.layers[l].dAlpha[i];
                CHECK(std::abs(fd - got) <=
                      1e-4 * std::max({std::abs(fd), std::abs(got), 1e-3}));
            }
        }
    }
}

TEST_CASE("single linear layer follows the boxed update rule") {
    // One sample, one linear layer, budget loose enough that the projection
    // does not rescale: W' = W - eta * e x^T.
    MnnLayer layer = MnnLayer::zeros(3, 11, Activation::Linear);
    Rng rng(200);
    for (Eigen::Index r = 0; r < 3; ++r) {
        for (Eigen::Index c = 0; c < 11; ++c) layer.W(r, c) = rng.uniform(-0.3, 0.3);
    }
    for (Eigen::Index r = 0; r < 3; ++r) {
        for (Eigen::Index c = 0; c < 3; ++c) layer.Q(r, c) = rng.uniform(-0.3, 0.3);
    }
    MnnNetwork net({layer}, 1e6);

    Sample sample;
    sample.input = rand_input(rng);
    sample.target = Eigen::Vector3d(0.2, -0.1, 0.4);
    Sequence seq;
    seq.samples = {sample};

    // Hand-compute the expected update from the initial state. Memory starts
    // at zero, so r after one step is still zero and the output is W x.
    const Eigen::VectorXd x = sample.input.to_vector();
    const Eigen::MatrixXd w0 = net.layers()[0].W;
    const Eigen::Vector3d e = w0 * x - sample.target;
    const double eta = 0.05;
    const Eigen::MatrixXd w_expected = w0 - eta * e * x.transpose();

    TrainConfig cfg;
    cfg.eta = eta;
    cfg.gamma = 1e6;
    cfg.epochs = 1;
    cfg.alpha_value = 0.5;
    MnnNetwork trained = net;
    (void)train(trained, {seq}, cfg);
    CHECK((trained.layers()[0].W - w_expected).norm() < 1e-12);
}

TEST_CASE("perfect targets leave loss at zero and weights in place") {
    MnnNetwork net = init_weights({11, 6, 3}, 1.0, 5);
    Rng rng(6);

    // Generate targets from the network itself along a short sequence.
    Sequence seq;
    {
        MnnNetwork gen = net;
        for (int i = 0; i < 20; ++i) {
            Sample s;
            s.input = rand_input(rng);
            s.target = gen.forward(s.input);
            seq.samples.push_back(s);
        }
    }

    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.eta = 1e-3;
    const MnnNetwork before = net;
    const TrainReport report = train(net, {seq}, cfg);
    for (double loss : report.per_epoch_loss) CHECK(loss < 1e-24);
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        CHECK((net.layers()[l].W - before.layers()[l].W).norm() < 1e-9);
        CHECK((net.layers()[l].Q - before.layers()[l].Q).norm() < 1e-9);
    }
    CHECK(evaluate(net, {seq}) < 1e-12);
}

TEST_CASE("evaluate basics") {
    std::vector<MnnLayer> layers;
    layers.push_back(MnnLayer::zeros(3, 11, Activation::Linear));
    MnnNetwork zero({layers}, 1.0);

    Sequence seq;
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        Sample s;
        s.input = rand_input(rng);
        s.target = Eigen::Vector3d(1, 0, 0);
        seq.samples.push_back(s);
    }
    CHECK(evaluate(zero, {seq}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("init_weights is deterministic and normalized") {
    const MnnNetwork a = init_weights({11, 100, 3}, 1.0, 12345);
    const MnnNetwork b = init_weights({11, 100, 3}, 1.0, 12345);
    const MnnNetwork c = init_weights({11, 100, 3}, 1.0, 54321);
    for (std::size_t l = 0; l < a.layers().size(); ++l) {
        CHECK(a.layers()[l].W == b.layers()[l].W);
        CHECK(a.layers()[l].Q == b.layers()[l].Q);
        CHECK((a.layers()[l].W - c.layers()[l].W).norm() > 0.0);
        CHECK(spectral_norm(a.layers()[l].W) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(spectral_norm(a.layers()[l].Q) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(a.layers()[l].alpha[0] == 0.5);
    }
}

TEST_CASE("hover training converges below 1 cm") {
    const std::vector<Sequence> data = hover_sequences(20.0);
    MnnNetwork net = init_weights({11, 30, 3}, 1.0, 17);
    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.eta = 3e-3;
    const TrainReport report = train(net, data, cfg);
    REQUIRE(report.per_epoch_loss.size() == 12);
    // Non-increasing after the initial transient.
    for (std::size_t i = 2; i < report.per_epoch_loss.size(); ++i) {
        CHECK(report.per_epoch_loss[i] <= report.per_epoch_loss[i - 1] * 1.02);
    }
    CHECK(report.final_rmse_train < 0.01);
}

TEST_CASE("constraint holds after every update") {
    const std::vector<Sequence> data = hover_sequences(4.0);
    MnnNetwork net = init_weights({11, 10, 3}, 1.0, 3);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.eta = 1e-2;
    const double budget = std::pow(cfg.gamma, 0.5);
    int checked = 0;
    TrainHooks hooks;
    hooks.after_update = [&](const MnnNetwork& n, int, std::size_t) {
        if (++checked % 37 != 0) return;  // spot-check to keep the test fast
        for (const MnnLayer& layer : n.layers()) {
            CHECK(spectral_norm(layer.W) <= budget * (1 + 1e-6));
            CHECK(spectral_norm(layer.Q) <= budget * (1 + 1e-6));
        }
    };
    (void)train(net, data, cfg, hooks);
    CHECK(checked > 200);
}

TEST_CASE("training is deterministic") {
    const std::vector<Sequence> data = hover_sequences(3.0);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.eta = 1e-3;
    MnnNetwork n1 = init_weights({11, 12, 3}, 1.0, 9);
    MnnNetwork n2 = init_weights({11, 12, 3}, 1.0, 9);
    const TrainReport r1 = train(n1, data, cfg);
    const TrainReport r2 = train(n2, data, cfg);
    CHECK(r1.per_epoch_loss == r2.per_epoch_loss);
    CHECK(r1.final_rmse_train == r2.final_rmse_train);
    for (std::size_t l = 0; l < n1.layers().size(); ++l) {
        CHECK(n1.layers()[l].W == n2.layers()[l].W);
        CHECK(n1.layers()[l].Q == n2.layers()[l].Q);
    }
}

TEST_CASE("learned alpha stays clamped to [0, 1]") {
    const std::vector<Sequence> data = hover_sequences(3.0);
    MnnNetwork net = init_weights({11, 8, 3}, 1.0, 21);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.eta = 1e-2;
    cfg.alpha_mode = AlphaMode::Learned;
    cfg.eta_alpha = 0.5;  // aggressive on purpose
    (void)train(net, data, cfg);
    for (const MnnLayer& layer : net.layers()) {
        CHECK(layer.alpha.minCoeff() >= 0.0);
        CHECK(layer.alpha.maxCoeff() <= 1.0);
    }
}

TEST_CASE("divergence aborts with epoch and sample in the message") {
    // Unconstrained training with a huge learning rate on large targets.
    Sequence seq;
    Rng rng(33);
    for (int i = 0; i < 200; ++i) {
        Sample s;
        s.input = rand_input(rng);
        s.input.prev_position *= 30.0;
        s.target = s.input.prev_position;
        seq.samples.push_back(s);
    }
    MnnNetwork net = init_weights({11, 16, 3}, 1.0, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.eta = 10.0;
    cfg.spectral_norm_enabled = false;
    try {
        (void)train(net, {seq}, cfg);
        FAIL("expected TrainDivergedError");
    } catch (const TrainDivergedError& e) {
        CHECK(e.epoch >= 1);
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
        CHECK(std::string(e.what()).find("sample") != std::string::npos);
    }
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    cfg.eta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = TrainConfig{};
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = TrainConfig{};
    cfg.alpha_value = 1.5;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}
