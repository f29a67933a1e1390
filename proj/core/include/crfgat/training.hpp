#pragma once

#include <cstdint>

#include "crfgat/gat.hpp"

namespace crfgat {

struct TrainingDivergedError : std::runtime_error {
    int epoch;
    explicit TrainingDivergedError(int epoch_index)
        : std::runtime_error("training diverged: non-finite loss at epoch " +
                             std::to_string(epoch_index)),
          epoch(epoch_index) {}
};

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 100;
    std::uint64_t seed = 0;
    bool train_sigma = false;
    bool symmetrize_mu = true;
    double fd_epsilon = 1e-5;

    void validate() const {
        if (!(learning_rate >= 0.0)) throw ShapeError("TrainConfig: learning_rate must be >= 0");
        if (epochs < 0) throw ShapeError("TrainConfig: epochs must be >= 0");
        if (!(fd_epsilon > 0.0)) throw ShapeError("TrainConfig: fd_epsilon must be positive");
    }
};

struct LabeledExample {
    ObservedSequence sequence;
    Labeling gold;
};

struct LabeledDataset {
    LabelSpace label_space;
    std::vector<LabeledExample> items;

    void validate() const;
};

/// Gradients for one distinct layer parameter block. Sigma gradients are
/// empty unless requested; non-Gaussian kernels carry no omega/sigma slots.
struct LayerGradients {
    Matrix mu;
    std::vector<double> omega;
    std::vector<double> sigma_spatial;
    std::vector<double> sigma_appearance;
};

/// One LayerGradients per distinct parameter block: size M normally, size 1
/// when the model shares parameters across layers.
struct GradientSet {
    std::vector<LayerGradients> layers;
    Matrix unary_weight;
    Vector unary_bias;
};

/// Mean over nodes of -log softmax(-psi_final) at the gold label.
double cross_entropy(const PotentialField& psi_final, const Labeling& gold);

/// Mean cross-entropy over the batch: classifier -> unary potentials ->
/// GAT forward -> loss per item.
double batch_loss(const CrfGatModel& model, const LabeledDataset& batch);

/// Central finite differences of batch_loss with respect to every trainable
/// scalar. The independent oracle for grad_analytic.
GradientSet grad_fd(const CrfGatModel& model, const LabeledDataset& batch, double eps,
                    bool train_sigma = false);

/// Exact reverse-mode gradients through the unrolled forward pass.
GradientSet grad_analytic(const CrfGatModel& model, const LabeledDataset& batch,
                          bool train_sigma = false);

struct TrainResult {
    CrfGatModel model;
    std::vector<double> loss_trace;  // batch loss at the start of each epoch
};

/// Full-batch gradient descent; mu is re-symmetrized after each step when
/// configured. Throws TrainingDivergedError on non-finite loss.
TrainResult train(CrfGatModel model, const LabeledDataset& data, const TrainConfig& cfg);

/// Fresh model: per-layer Potts-plus-noise mu, unit kernel weights, small
/// Gaussian unary weights. Deterministic given the seed.
CrfGatModel init_gat_model(const LabelSpace& labels, int observation_dim, int depth,
                           const KernelSpec& kernel_template, std::uint64_t seed);

/// Unary-only baseline: trains just the linear-softmax classifier by the
/// same full-batch descent.
struct UnaryTrainResult {
    UnaryClassifierParams params;
    std::vector<double> loss_trace;
};
UnaryTrainResult train_unary(UnaryClassifierParams params, const LabeledDataset& data,
                             const TrainConfig& cfg);

}  // namespace crfgat
