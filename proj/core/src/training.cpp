#include "crfgat/training.hpp"

#include <cmath>
#include <optional>
#include <random>

namespace crfgat {

namespace {

Eigen::RowVectorXd softmax_row(const Eigen::RowVectorXd& logits) {
    Eigen::RowVectorXd e = (logits.array() - logits.maxCoeff()).exp();
    return e / e.sum();
}

// Backprop through a row-wise P = softmax(-psi): given pbar = dL/dP, returns
// the dL/dpsi contribution.
Matrix softmax_neg_backward(const Matrix& p, const Matrix& pbar) {
    Matrix out(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        double dot = p.row(i).dot(pbar.row(i));
        out.row(i) = p.row(i).array() * (dot - pbar.row(i).array());
    }
    return out;
}

// Pairwise squared distances, shared by every Gaussian layer on one item.
struct PairwiseDistances {
    Matrix sq_pos;
    Matrix sq_obs;
};

PairwiseDistances pairwise_distances(const ObservedSequence& seq) {
    const int n = seq.size();
    PairwiseDistances d;
    d.sq_pos = Matrix::Zero(n, n);
    d.sq_obs = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            d.sq_pos(i, j) = d.sq_pos(j, i) =
                (seq.positions.row(i) - seq.positions.row(j)).squaredNorm();
            d.sq_obs(i, j) = d.sq_obs(j, i) =
                (seq.observations.row(i) - seq.observations.row(j)).squaredNorm();
        }
    return d;
}

// Per-component factor matrices exp(-dp^2/2s1^2 - dx^2/2s2^2), zero diagonal;
// the attention matrix is their omega-weighted sum.
std::vector<Matrix> gaussian_exp_factors(const PairwiseDistances& d,
                                         const GaussianBilateralKernel& k) {
    std::vector<Matrix> exps;
    for (const auto& c : k.components) {
        Matrix e = (-d.sq_pos.array() / (2.0 * c.sigma_spatial * c.sigma_spatial) -
                    d.sq_obs.array() / (2.0 * c.sigma_appearance * c.sigma_appearance))
                       .exp();
        e.diagonal().setZero();
        exps.push_back(std::move(e));
    }
    return exps;
}

LayerGradients zero_layer_gradients(const GatLayerParams& params, bool train_sigma) {
    LayerGradients g;
    g.mu = Matrix::Zero(params.mu.mu.rows(), params.mu.mu.cols());
    if (const auto* gauss = std::get_if<GaussianBilateralKernel>(&params.kernel)) {
        g.omega.assign(gauss->components.size(), 0.0);
        if (train_sigma) {
            g.sigma_spatial.assign(gauss->components.size(), 0.0);
            g.sigma_appearance.assign(gauss->components.size(), 0.0);
        }
    }
    return g;
}

GradientSet zero_gradients(const CrfGatModel& model, bool train_sigma) {
    GradientSet g;
    const int blocks = model.share_parameters ? 1 : model.depth();
    for (int m = 0; m < blocks; ++m)
        g.layers.push_back(zero_layer_gradients(model.layers[m], train_sigma));
    g.unary_weight = Matrix::Zero(model.unary_params.weight.rows(), model.unary_params.weight.cols());
    g.unary_bias = Vector::Zero(model.unary_params.bias.size());
    return g;
}

// Enumerates every trainable scalar as a mutator, in a fixed order matching
// the GradientSet layout. Used by grad_fd and by the descent step.
template <typename Fn>
void for_each_parameter(CrfGatModel& model, GradientSet& grads, bool train_sigma, Fn&& fn) {
    const int blocks = model.share_parameters ? 1 : model.depth();
    for (int m = 0; m < blocks; ++m) {
        auto& layer = model.layers[m];
        auto& g = grads.layers[m];
        for (Eigen::Index r = 0; r < layer.mu.mu.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.mu.mu.cols(); ++c) fn(layer.mu.mu(r, c), g.mu(r, c));
        if (auto* gauss = std::get_if<GaussianBilateralKernel>(&layer.kernel)) {
            for (size_t ci = 0; ci < gauss->components.size(); ++ci) {
                fn(gauss->components[ci].omega, g.omega[ci]);
                if (train_sigma) {
                    fn(gauss->components[ci].sigma_spatial, g.sigma_spatial[ci]);
                    fn(gauss->components[ci].sigma_appearance, g.sigma_appearance[ci]);
                }
            }
        }
    }
    for (Eigen::Index r = 0; r < model.unary_params.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < model.unary_params.weight.cols(); ++c)
            fn(model.unary_params.weight(r, c), grads.unary_weight(r, c));
    for (Eigen::Index c = 0; c < model.unary_params.bias.size(); ++c)
        fn(model.unary_params.bias(c), grads.unary_bias(c));
}

}  // namespace

void LabeledDataset::validate() const {
    label_space.validate();
    for (const auto& item : items) {
        item.sequence.validate();
        if (item.gold.size() != item.sequence.size())
            throw ShapeError("LabeledDataset: gold labeling length mismatch");
        for (int l : item.gold.y)
            if (l < 0 || l >= label_space.num_labels)
                throw ShapeError("LabeledDataset: gold label out of range");
    }
}

Matrix classifier_logits(const UnaryClassifierParams& params, const ObservedSequence& seq) {
    if (seq.observation_dim() != params.weight.rows())
        throw ShapeError("classifier_logits: observation dimension does not match weights");
    return (seq.observations * params.weight).rowwise() + params.bias.transpose();
}

MarginalField classifier_probs(const UnaryClassifierParams& params, const ObservedSequence& seq) {
    Matrix z = classifier_logits(params, seq);
    MarginalField out;
    out.q.resize(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) out.q.row(i) = softmax_row(z.row(i));
    return out;
}

UnaryPotentials classifier_potentials(const UnaryClassifierParams& params,
                                      const ObservedSequence& seq) {
    Matrix z = classifier_logits(params, seq);
    UnaryPotentials out;
    out.psi.resize(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        double mx = z.row(i).maxCoeff();
        double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
        out.psi.row(i) = (lse - z.row(i).array()).matrix();
    }
    return out;
}

double cross_entropy(const PotentialField& psi_final, const Labeling& gold) {
    if (gold.size() != psi_final.psi.rows())
        throw ShapeError("cross_entropy: gold labeling length mismatch");
    double loss = 0.0;
    for (int i = 0; i < gold.size(); ++i) {
        // -log softmax(-psi)_{gold} = psi_gold + logsumexp(-psi row), always finite
        Eigen::RowVectorXd neg = -psi_final.psi.row(i);
        double mx = neg.maxCoeff();
        double lse = mx + std::log((neg.array() - mx).exp().sum());
        loss += psi_final.psi(i, gold.y[i]) + lse;
    }
    return loss / gold.size();
}

double batch_loss(const CrfGatModel& model, const LabeledDataset& batch) {
    if (batch.items.empty()) return 0.0;
    double total = 0.0;
    for (const auto& item : batch.items) {
        UnaryPotentials unary = classifier_potentials(model.unary_params, item.sequence);
        auto [psi, trace] = gat_forward(model, item.sequence, unary, /*keep_trace=*/false);
        total += cross_entropy(psi, item.gold);
    }
    return total / batch.items.size();
}

GradientSet grad_fd(const CrfGatModel& model, const LabeledDataset& batch, double eps,
                    bool train_sigma) {
    if (!(eps > 0.0)) throw ShapeError("grad_fd: eps must be positive");
    CrfGatModel work = model;
    // Entries of mu are perturbed one at a time, so the exact-symmetry
    // invariant cannot be maintained on the working copy.
    for (auto& layer : work.layers) layer.mu.symmetric = false;
    GradientSet grads = zero_gradients(model, train_sigma);
    for_each_parameter(work, grads, train_sigma, [&](double& param, double& grad) {
        const double saved = param;
        param = saved + eps;
        double up = batch_loss(work, batch);
        param = saved - eps;
        double down = batch_loss(work, batch);
        param = saved;
        grad = (up - down) / (2.0 * eps);
    });
    return grads;
}

namespace {

// Single pass that yields both the batch loss and its gradients; the forward
// state (layer distributions, attention matrices, Gaussian factors) is cached
// so the backward sweep does not recompute any O(N^2) quantity.
GradientSet grad_with_loss(const CrfGatModel& model, const LabeledDataset& batch,
                           bool train_sigma, double* loss_out) {
    model.validate();
    GradientSet grads = zero_gradients(model, train_sigma);
    if (loss_out) *loss_out = 0.0;
    if (batch.items.empty()) return grads;
    const double inv_batch = 1.0 / batch.items.size();
    const int depth = model.depth();

    for (const auto& item : batch.items) {
        const auto& seq = item.sequence;
        const int n = seq.size();

        UnaryPotentials unary = classifier_potentials(model.unary_params, seq);
        std::optional<PairwiseDistances> dists;
        std::vector<Matrix> ps(depth), alphas(depth);
        std::vector<std::vector<Matrix>> factors(depth);
        Matrix psi = unary.psi;
        for (int m = 0; m < depth; ++m) {
            const GatLayerParams& layer = model.layer(m);
            ps[m] = distribution_from_potentials(PotentialField{psi}).q;
            if (const auto* gauss = std::get_if<GaussianBilateralKernel>(&layer.kernel)) {
                if (!dists) dists = pairwise_distances(seq);
                factors[m] = gaussian_exp_factors(*dists, *gauss);
                Matrix alpha = Matrix::Zero(n, n);
                for (size_t ci = 0; ci < factors[m].size(); ++ci)
                    alpha += gauss->components[ci].omega * factors[m][ci];
                alphas[m] = std::move(alpha);
            } else {
                alphas[m] = kernel_matrix(seq, layer.kernel);
            }
            psi += alphas[m] * (ps[m] * layer.mu.mu.transpose());
        }
        if (loss_out) *loss_out += cross_entropy(PotentialField{psi}, item.gold) * inv_batch;

        // dL/dpsi_M for L = (1/N) sum_i -log softmax(-psi)_{i,gold}.
        MarginalField s = distribution_from_potentials(PotentialField{psi});
        Matrix psi_bar = -s.q;
        for (int i = 0; i < n; ++i) psi_bar(i, item.gold.y[i]) += 1.0;
        psi_bar *= inv_batch / n;

        for (int m = depth - 1; m >= 0; --m) {
            const GatLayerParams& layer = model.layer(m);
            LayerGradients& g = grads.layers[model.share_parameters ? 0 : m];
            const Matrix& p = ps[m];
            Matrix v = p * layer.mu.mu.transpose();

            const Matrix& r_bar = psi_bar;  // psi_m = psi_{m-1} + R
            Matrix alpha_bar = r_bar * v.transpose();
            alpha_bar.diagonal().setZero();
            Matrix v_bar = alphas[m].transpose() * r_bar;
            g.mu += v_bar.transpose() * p;
            Matrix p_bar = v_bar * layer.mu.mu;

            if (const auto* gauss = std::get_if<GaussianBilateralKernel>(&layer.kernel)) {
                for (size_t ci = 0; ci < gauss->components.size(); ++ci) {
                    const auto& c = gauss->components[ci];
                    g.omega[ci] += alpha_bar.cwiseProduct(factors[m][ci]).sum();
                    if (train_sigma) {
                        double s1 = c.sigma_spatial, s2 = c.sigma_appearance;
                        g.sigma_spatial[ci] += (alpha_bar.array() * factors[m][ci].array() *
                                                c.omega * dists->sq_pos.array() / (s1 * s1 * s1))
                                                   .sum();
                        g.sigma_appearance[ci] += (alpha_bar.array() * factors[m][ci].array() *
                                                   c.omega * dists->sq_obs.array() / (s2 * s2 * s2))
                                                      .sum();
                    }
                }
            }
            psi_bar = psi_bar + softmax_neg_backward(p, p_bar);
        }

        // Through psi_0 = logsumexp(z) - z.
        MarginalField p0 = classifier_probs(model.unary_params, seq);
        Matrix z_bar(n, p0.q.cols());
        for (int i = 0; i < n; ++i) {
            double total = psi_bar.row(i).sum();
            z_bar.row(i) = p0.q.row(i).array() * total - psi_bar.row(i).array();
        }
        grads.unary_weight += seq.observations.transpose() * z_bar;
        grads.unary_bias += z_bar.colwise().sum().transpose();
    }
    return grads;
}

}  // namespace

GradientSet grad_analytic(const CrfGatModel& model, const LabeledDataset& batch,
                          bool train_sigma) {
    return grad_with_loss(model, batch, train_sigma, nullptr);
}

TrainResult train(CrfGatModel model, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = 0.0;
        GradientSet grads = grad_with_loss(model, data, cfg.train_sigma, &loss);
        if (!std::isfinite(loss)) throw TrainingDivergedError(epoch);
        result.loss_trace.push_back(loss);

        for_each_parameter(model, grads, cfg.train_sigma,
                           [&](double& param, double& grad) { param -= cfg.learning_rate * grad; });
        if (cfg.symmetrize_mu) {
            for (auto& layer : model.layers) {
                Matrix& mu = layer.mu.mu;
                mu = ((mu + mu.transpose()) / 2.0).eval();
            }
        } else {
            // A raw gradient step does not preserve exact symmetry.
            for (auto& layer : model.layers) layer.mu.symmetric = false;
        }
    }
    result.model = std::move(model);
    return result;
}

CrfGatModel init_gat_model(const LabelSpace& labels, int observation_dim, int depth,
                           const KernelSpec& kernel_template, std::uint64_t seed) {
    labels.validate();
    if (depth < 1) throw ShapeError("init_gat_model: depth must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::normal_distribution<double> gauss(0.0, 0.1);
    const int k = labels.num_labels;

    CrfGatModel model;
    model.label_space = labels;
    for (int m = 0; m < depth; ++m) {
        GatLayerParams layer;
        layer.mu.mu = Matrix::Ones(k, k) - Matrix::Identity(k, k);  // Potts
        for (int r = 0; r < k; ++r)
            for (int c = r; c < k; ++c) {
                double eps = noise(rng);
                layer.mu.mu(r, c) += eps;
                if (c != r) layer.mu.mu(c, r) += eps;
            }
        layer.mu.symmetric = true;
        layer.kernel = kernel_template;
        if (auto* g = std::get_if<GaussianBilateralKernel>(&layer.kernel))
            for (auto& comp : g->components) comp.omega = 1.0;
        model.layers.push_back(std::move(layer));
    }
    model.unary_params.weight = Matrix::NullaryExpr(observation_dim, k, [&] { return gauss(rng); });
    model.unary_params.bias = Vector::Zero(k);
    return model;
}

UnaryTrainResult train_unary(UnaryClassifierParams params, const LabeledDataset& data,
                             const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    UnaryTrainResult result;
    auto loss_and_grads = [&](const UnaryClassifierParams& p, Matrix& w_grad, Vector& b_grad) {
        double total = 0.0;
        w_grad.setZero();
        b_grad.setZero();
        const double inv_batch = data.items.empty() ? 0.0 : 1.0 / data.items.size();
        for (const auto& item : data.items) {
            MarginalField probs = classifier_probs(p, item.sequence);
            const int n = item.sequence.size();
            Matrix z_bar = probs.q;
            for (int i = 0; i < n; ++i) {
                total -= std::log(std::max(probs.q(i, item.gold.y[i]), kProbClamp)) * inv_batch / n;
                z_bar(i, item.gold.y[i]) -= 1.0;
            }
            z_bar *= inv_batch / n;
            w_grad += item.sequence.observations.transpose() * z_bar;
            b_grad += z_bar.colwise().sum().transpose();
        }
        return total;
    };

    Matrix w_grad = Matrix::Zero(params.weight.rows(), params.weight.cols());
    Vector b_grad = Vector::Zero(params.bias.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = loss_and_grads(params, w_grad, b_grad);
        if (!std::isfinite(loss)) throw TrainingDivergedError(epoch);
        result.loss_trace.push_back(loss);
        params.weight -= cfg.learning_rate * w_grad;
        params.bias -= cfg.learning_rate * b_grad;
    }
    result.params = std::move(params);
    return result;
}

}  // namespace crfgat
