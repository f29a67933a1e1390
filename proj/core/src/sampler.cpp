#include "crfgat/sampler.hpp"

#include <cmath>
#include <random>

namespace crfgat {

namespace {

// Unnormalized log conditional of label l at node i given all other labels.
double conditional_logit(const CrfModel& model, const Matrix& kmat, const Labeling& y, int i,
                         int l) {
    double e = model.unary.psi(i, l);
    for (int j = 0; j < model.num_nodes(); ++j)
        if (j != i) e += model.compatibility.mu(l, y.y[j]) * kmat(i, j);
    return -e;
}

}  // namespace

MarginalField gibbs_sample(const CrfModel& model, const SamplerConfig& cfg) {
    model.validate();
    cfg.validate();
    const int n = model.num_nodes();
    const int k = model.num_labels();
    const Matrix kmat = kernel_matrix(model.sequence, model.kernel);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> label_dist(0, k - 1);

    // Start from the per-node unary minimizer.
    Labeling y{std::vector<int>(n, 0)};
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int l = 1; l < k; ++l)
            if (model.unary.psi(i, l) < model.unary.psi(i, best)) best = l;
        y.y[i] = best;
    }

    Matrix counts = Matrix::Zero(n, k);
    Eigen::VectorXd logits(k);
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            if (cfg.variant == SamplerVariant::Gibbs) {
                for (int l = 0; l < k; ++l) logits(l) = conditional_logit(model, kmat, y, i, l);
                Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
                p /= p.sum();
                double u = unif(rng);
                double acc = 0.0;
                int pick = k - 1;
                for (int l = 0; l < k; ++l) {
                    acc += p(l);
                    if (u < acc) {
                        pick = l;
                        break;
                    }
                }
                y.y[i] = pick;
            } else {
                int proposal = label_dist(rng);
                double delta = conditional_logit(model, kmat, y, i, proposal) -
                               conditional_logit(model, kmat, y, i, y.y[i]);
                if (delta >= 0.0 || unif(rng) < std::exp(delta)) y.y[i] = proposal;
            }
        }
        if (sweep >= cfg.burn_in)
            for (int i = 0; i < n; ++i) counts(i, y.y[i]) += 1.0;
    }

    MarginalField out;
    out.q = counts / static_cast<double>(cfg.sweeps - cfg.burn_in);
    return out;
}

}  // namespace crfgat
