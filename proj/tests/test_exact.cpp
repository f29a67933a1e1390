#include <doctest.h>

#include "test_util.hpp"

using namespace crfgat;
using crfgat::testing::tiny_instance;

TEST_CASE("tiny-instance golden values") {
    ExactResult r = enumerate_exact(tiny_instance());
    CHECK(r.log_Z == doctest::Approx(0.5642696986114112).epsilon(1e-12));
    CHECK(r.marginals.q(0, 0) == doctest::Approx(0.62936739).epsilon(1e-6));
    CHECK(r.marginals.q(1, 1) == doctest::Approx(0.62936739).epsilon(1e-6));
    CHECK(r.map_labeling == Labeling{{0, 1}});
    CHECK(r.map_energy == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero-energy model is uniform with lexicographic MAP tie-break") {
    CrfModel m = tiny_instance();
    m.unary.psi.setZero();
    m.compatibility.mu.setZero();
    ExactResult r = enumerate_exact(m);
    CHECK(r.log_Z == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK((r.marginals.q.array() - 0.5).abs().maxCoeff() < 1e-12);
    CHECK(r.map_labeling == Labeling{{0, 0}});
}

TEST_CASE("kernel-0 model factorizes into softmax(-psi_u)") {
    std::mt19937_64 rng(5);
    CrfModel m = crfgat::testing::random_model(rng, 6, 3);
    m.kernel = scale_kernel_weights(m.kernel, 0.0);
    ExactResult r = enumerate_exact(m);
    MarginalField expected = distribution_from_potentials(PotentialField{m.unary.psi});
    CHECK((r.marginals.q - expected.q).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("enumeration cap is enforced with the count in the message") {
    CrfModel m = tiny_instance();
    CHECK_THROWS_AS(enumerate_exact(m, 3), InstanceTooLargeError);
    try {
        enumerate_exact(m, 3);
    } catch (const InstanceTooLargeError& e) {
        CHECK(std::string(e.what()).find("4") != std::string::npos);
    }
}

TEST_CASE("marginals are row stochastic on random instances") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        CrfModel m = crfgat::testing::random_model(rng, 6, 3);
        ExactResult r = enumerate_exact(m);
        for (int i = 0; i < m.num_nodes(); ++i)
            CHECK(r.marginals.q.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("MAP energy lower-bounds random labelings") {
    std::mt19937_64 rng(13);
    CrfModel m = crfgat::testing::random_model(rng, 7, 3);
    ExactResult r = enumerate_exact(m);
    for (int trial = 0; trial < 1000; ++trial) {
        Labeling y = crfgat::testing::random_labeling(rng, m.num_nodes(), m.num_labels());
        CHECK(r.map_energy <= gibbs_energy(y, m) + 1e-12);
    }
}

TEST_CASE("exact_kl") {
    CrfModel t1 = tiny_instance();
    SUBCASE("is zero when q equals the factorized model's marginals") {
        CrfModel m = t1;
        m.kernel = PrecomputedKernel{Matrix::Zero(2, 2)};
        MarginalField q = enumerate_exact(m).marginals;
        CHECK(std::abs(exact_kl(q, m)) < 1e-10);
    }
    SUBCASE("uniform q reproduces the hand value") {
        MarginalField q{Matrix::Constant(2, 2, 0.5)};
        CHECK(exact_kl(q, t1) == doctest::Approx(0.1211225180514659).epsilon(1e-10));
    }
    SUBCASE("one mean-field step does not increase KL from init") {
        MarginalField q0 = init_marginals(t1);
        MarginalField q1 = mf_step_eq6(q0, t1);
        double kl0 = exact_kl(q0, t1);
        double kl1 = exact_kl(q1, t1);
        CHECK(kl1 >= -1e-12);
        CHECK(kl1 <= kl0);
        CHECK(kl0 == doctest::Approx(0.03111726017286017).epsilon(1e-10));
        CHECK(kl1 == doctest::Approx(0.026279496665446066).epsilon(1e-10));
    }
    SUBCASE("non-negative for random fields (Gibbs' inequality)") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            CrfModel m = crfgat::testing::random_model(rng, 5, 3);
            MarginalField q = crfgat::testing::random_field(rng, m.num_nodes(), m.num_labels());
            CHECK(exact_kl(q, m) >= -1e-12);
        }
    }
    SUBCASE("zero-probability q entries contribute nothing") {
        MarginalField q{Matrix::Zero(2, 2)};
        q.q << 1, 0, 0, 1;
        double kl = exact_kl(q, t1);
        // Q is a point mass on (1,2): KL = -log P(1,2) = E(1,2) + log Z
        CHECK(kl == doctest::Approx(0.5 + 0.5642696986114112).epsilon(1e-10));
    }
}
