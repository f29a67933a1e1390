#pragma once

#include <vector>

#include "crfgat/classifier.hpp"

namespace crfgat {

/// Parameters of one attention layer: its own compatibility matrix and
/// kernel spec (layers are independent unless sharing is forced).
struct GatLayerParams {
    CompatibilityMatrix mu;
    KernelSpec kernel;
};

/// The residual graph-attention model. When share_parameters is set, every
/// layer uses layers[0]; layers.size() still gives the depth M.
struct CrfGatModel {
    LabelSpace label_space;
    std::vector<GatLayerParams> layers;
    UnaryClassifierParams unary_params;
    bool share_parameters = false;

    int depth() const { return static_cast<int>(layers.size()); }
    const GatLayerParams& layer(int m) const { return layers[share_parameters ? 0 : m]; }

    void validate() const;
};

/// Per-layer snapshots of the forward pass; psi[m] - psi[m-1] == residual[m]
/// exactly.
struct GatTrace {
    std::vector<MarginalField> distributions;   // P before each layer's update
    std::vector<Matrix> residuals;              // R per layer
    std::vector<PotentialField> potentials;     // psi after each layer
};

/// One layer: P = softmax(-psi); V = P mu^T; alpha = kernel matrix (zero
/// diagonal); R = alpha V; returns (psi + R, R).
std::pair<PotentialField, Matrix> gat_layer(const PotentialField& psi, const ObservedSequence& seq,
                                            const GatLayerParams& params);

/// Full forward pass from the given unary potentials through all layers.
std::pair<PotentialField, GatTrace> gat_forward(const CrfGatModel& model,
                                                const ObservedSequence& seq,
                                                const UnaryPotentials& unary,
                                                bool keep_trace = true);

/// Per node, the label with minimal potential; ties pick the smallest index.
Labeling decode_argmin(const PotentialField& psi);

}  // namespace crfgat
