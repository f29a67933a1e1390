#include <doctest.h>

#include "crfgat/synthetic.hpp"
#include "test_util.hpp"

using namespace crfgat;
using crfgat::testing::tiny_instance;

namespace {

LabeledDataset random_batch(std::mt19937_64& rng, int items, int n, int k, int d_x) {
    LabeledDataset data;
    data.label_space.num_labels = k;
    for (int i = 0; i < items; ++i) {
        LabeledExample ex;
        ex.sequence = crfgat::testing::random_sequence(rng, n, 2, d_x);
        ex.gold = crfgat::testing::random_labeling(rng, n, k);
        data.items.push_back(std::move(ex));
    }
    return data;
}

double max_relative_error(const GradientSet& a, const GradientSet& b) {
    double worst = 0.0;
    auto update = [&](double x, double y) {
        worst = std::max(worst, std::abs(x - y) / std::max(1e-8, std::abs(y)));
    };
    REQUIRE(a.layers.size() == b.layers.size());
    for (size_t m = 0; m < a.layers.size(); ++m) {
        for (Eigen::Index i = 0; i < a.layers[m].mu.size(); ++i)
            update(a.layers[m].mu(i), b.layers[m].mu(i));
        for (size_t c = 0; c < a.layers[m].omega.size(); ++c)
            update(a.layers[m].omega[c], b.layers[m].omega[c]);
        for (size_t c = 0; c < a.layers[m].sigma_spatial.size(); ++c) {
            update(a.layers[m].sigma_spatial[c], b.layers[m].sigma_spatial[c]);
            update(a.layers[m].sigma_appearance[c], b.layers[m].sigma_appearance[c]);
        }
    }
    for (Eigen::Index i = 0; i < a.unary_weight.size(); ++i)
        update(a.unary_weight(i), b.unary_weight(i));
    for (Eigen::Index i = 0; i < a.unary_bias.size(); ++i)
        update(a.unary_bias(i), b.unary_bias(i));
    return worst;
}

}  // namespace

TEST_CASE("cross_entropy") {
    SUBCASE("uniform potentials give ln K") {
        PotentialField psi{Matrix::Zero(3, 2)};
        CHECK(cross_entropy(psi, Labeling{{0, 1, 0}}) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("a 30-nat margin saturates") {
        Matrix p(1, 2);
        p << 0.0, 30.0;
        CHECK(cross_entropy(PotentialField{p}, Labeling{{0}}) < 1e-12);
        CHECK(cross_entropy(PotentialField{p}, Labeling{{0}}) >= 0.0);
    }
    SUBCASE("frozen value from the tiny-instance one-layer forward") {
        CrfModel t1 = tiny_instance();
        auto [psi, r] = gat_layer(PotentialField{t1.unary.psi}, t1.sequence,
                                  GatLayerParams{t1.compatibility, t1.kernel});
        CHECK(cross_entropy(psi, Labeling{{0, 1}}) ==
              doctest::Approx(0.4641617275385563).epsilon(1e-10));
    }
}

TEST_CASE("zero-kernel model has zero mu gradients") {
    std::mt19937_64 rng(2);
    CrfGatModel model = crfgat::testing::random_gat_model(rng, 3, 2, 2);
    for (auto& layer : model.layers) layer.kernel = scale_kernel_weights(layer.kernel, 0.0);
    LabeledDataset batch = random_batch(rng, 2, 4, 3, 2);

    GradientSet fd = grad_fd(model, batch, 1e-5);
    GradientSet an = grad_analytic(model, batch);
    for (const auto& layer : fd.layers) CHECK(layer.mu.cwiseAbs().maxCoeff() < 1e-8);
    for (const auto& layer : an.layers) CHECK(layer.mu.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("duplicated batch entries leave the mean gradient unchanged") {
    std::mt19937_64 rng(3);
    CrfGatModel model = crfgat::testing::random_gat_model(rng, 3, 2, 2);
    LabeledDataset one = random_batch(rng, 1, 4, 3, 2);
    LabeledDataset doubled = one;
    doubled.items.push_back(one.items[0]);
    GradientSet g1 = grad_analytic(model, one);
    GradientSet g2 = grad_analytic(model, doubled);
    CHECK(max_relative_error(g1, g2) < 1e-12);
}

TEST_CASE("analytic gradients match finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> n_dist(2, 6), k_dist(2, 3), m_dist(1, 3);
    for (int trial = 0; trial < 15; ++trial) {
        const int k = k_dist(rng);
        CrfGatModel model = crfgat::testing::random_gat_model(rng, k, 2, m_dist(rng));
        LabeledDataset batch = random_batch(rng, 2, n_dist(rng), k, 2);
        GradientSet fd = grad_fd(model, batch, 1e-5);
        GradientSet an = grad_analytic(model, batch);
        CHECK(max_relative_error(an, fd) < 1e-4);
    }
}

TEST_CASE("sigma gradients match finite differences when trained") {
    std::mt19937_64 rng(6);
    CrfGatModel model = crfgat::testing::random_gat_model(rng, 3, 2, 2);
    LabeledDataset batch = random_batch(rng, 2, 5, 3, 2);
    GradientSet fd = grad_fd(model, batch, 1e-5, /*train_sigma=*/true);
    GradientSet an = grad_analytic(model, batch, /*train_sigma=*/true);
    CHECK(max_relative_error(an, fd) < 1e-4);
}

TEST_CASE("shared-parameter gradient is the sum of untied per-layer gradients") {
    std::mt19937_64 rng(7);
    CrfGatModel tied = crfgat::testing::random_gat_model(rng, 3, 2, 3, /*shared=*/true);
    CrfGatModel untied = tied;
    untied.share_parameters = false;
    untied.layers[1] = untied.layers[0];
    untied.layers[2] = untied.layers[0];
    LabeledDataset batch = random_batch(rng, 2, 5, 3, 2);

    GradientSet g_tied = grad_analytic(tied, batch);
    GradientSet g_untied = grad_analytic(untied, batch);
    REQUIRE(g_tied.layers.size() == 1);
    REQUIRE(g_untied.layers.size() == 3);
    Matrix mu_sum = g_untied.layers[0].mu + g_untied.layers[1].mu + g_untied.layers[2].mu;
    CHECK((g_tied.layers[0].mu - mu_sum).cwiseAbs().maxCoeff() < 1e-12);

    // and the tied analytic gradient agrees with the tied finite difference
    GradientSet g_fd = grad_fd(tied, batch, 1e-5);
    CHECK(max_relative_error(g_tied, g_fd) < 1e-4);
}

TEST_CASE("train edge cases") {
    std::mt19937_64 rng(8);
    CrfGatModel model = crfgat::testing::random_gat_model(rng, 3, 2, 2);
    LabeledDataset batch = random_batch(rng, 2, 4, 3, 2);

    SUBCASE("learning_rate 0 leaves the model unchanged") {
        TrainConfig cfg;
        cfg.learning_rate = 0.0;
        cfg.epochs = 3;
        TrainResult r = train(model, batch, cfg);
        CHECK(r.loss_trace.size() == 3);
        CHECK(r.loss_trace[0] == doctest::Approx(r.loss_trace[2]).epsilon(1e-14));
        CHECK(r.model.unary_params.weight == model.unary_params.weight);
        CHECK(r.model.layers[0].mu.mu == model.layers[0].mu.mu);
    }
    SUBCASE("epochs 0 gives an empty trace") {
        TrainConfig cfg;
        cfg.epochs = 0;
        TrainResult r = train(model, batch, cfg);
        CHECK(r.loss_trace.empty());
        CHECK(r.model.layers[0].mu.mu == model.layers[0].mu.mu);
    }
    SUBCASE("a small step does not increase the loss") {
        TrainConfig cfg;
        cfg.learning_rate = 1e-3;
        cfg.epochs = 2;
        cfg.symmetrize_mu = false;
        TrainResult r = train(model, batch, cfg);
        CHECK(r.loss_trace[1] <= r.loss_trace[0] + 1e-10);
    }
}

TEST_CASE("symmetrization is idempotent") {
    std::mt19937_64 rng(9);
    CrfGatModel model = crfgat::testing::random_gat_model(rng, 3, 2, 1);  // mu already symmetric
    Matrix before = model.layers[0].mu.mu;
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 1;
    TrainResult r = train(model, random_batch(rng, 1, 3, 3, 2), cfg);
    CHECK(r.model.layers[0].mu.mu == before);
}

TEST_CASE("init_gat_model is deterministic and near-Potts") {
    LabelSpace labels{3};
    KernelSpec kernel{GaussianBilateralKernel{{{1.0, 1.0, 1.0}}}};
    CrfGatModel a = init_gat_model(labels, 3, 2, kernel, 42);
    CrfGatModel b = init_gat_model(labels, 3, 2, kernel, 42);
    CHECK(a.layers[0].mu.mu == b.layers[0].mu.mu);
    CHECK(a.unary_params.weight == b.unary_params.weight);
    Matrix potts = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
    CHECK((a.layers[0].mu.mu - potts).cwiseAbs().maxCoeff() <= 0.01);
    CHECK((a.layers[0].mu.mu - a.layers[0].mu.mu.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train_unary fits separable data") {
    SyntheticSpec spec;
    spec.topology = GridTopology{4, 4};
    spec.num_labels = 2;
    spec.noise_sigma = 1e-6;
    spec.blob_count = 2;
    spec.seed = 1;
    spec.item_count = 4;
    LabeledDataset data = gen_synthetic(spec);

    UnaryClassifierParams params;
    params.weight = Matrix::Zero(2, 2);
    params.bias = Vector::Zero(2);
    TrainConfig cfg;
    cfg.learning_rate = 2.0;
    cfg.epochs = 200;
    UnaryTrainResult r = train_unary(params, data, cfg);

    int correct = 0, total = 0;
    for (const auto& item : data.items) {
        Labeling pred = decode_argmax(classifier_probs(r.params, item.sequence));
        for (int i = 0; i < pred.size(); ++i) {
            correct += (pred.y[i] == item.gold.y[i]);
            ++total;
        }
    }
    CHECK(correct == total);
}
