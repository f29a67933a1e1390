#pragma once

#include "crfgat/model.hpp"

namespace crfgat {

/// Per-node linear-softmax classifier: probs_i = softmax(W^T X_i + b).
struct UnaryClassifierParams {
    Matrix weight;  // d_x x K
    Vector bias;    // K

    int num_labels() const { return static_cast<int>(bias.size()); }
};

/// Per-node logits W^T X_i + b, N x K.
Matrix classifier_logits(const UnaryClassifierParams& params, const ObservedSequence& seq);

/// Classifier output distribution per node.
MarginalField classifier_probs(const UnaryClassifierParams& params, const ObservedSequence& seq);

/// Unary potentials -log softmax(logits), computed directly in log space
/// (no clamp needed; exact even where probabilities underflow).
UnaryPotentials classifier_potentials(const UnaryClassifierParams& params,
                                      const ObservedSequence& seq);

}  // namespace crfgat
