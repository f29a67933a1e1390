#pragma once

#include "crfgat/kernels.hpp"
#include "crfgat/types.hpp"

namespace crfgat {

/// Probabilities below this are clamped before taking logarithms, keeping
/// potentials finite.
inline constexpr double kProbClamp = 1e-12;

/// The fully connected pairwise CRF: unary potentials plus
/// mu(l, l') * k(f_i, f_j) couplings over every node pair.
struct CrfModel {
    LabelSpace label_space;
    ObservedSequence sequence;
    UnaryPotentials unary;
    CompatibilityMatrix compatibility;
    KernelSpec kernel;

    int num_nodes() const { return sequence.size(); }
    int num_labels() const { return label_space.num_labels; }

    void validate() const;
};

/// Gibbs energy E(y) = sum_i psi_u(i, y_i) + sum_{i<j} mu(y_i, y_j) k(f_i, f_j).
/// Pairs iterate in ascending (i, j) order so results are bit-deterministic.
double gibbs_energy(const Labeling& y, const CrfModel& model);

/// Same, against a precomputed kernel matrix (zero diagonal assumed).
double gibbs_energy(const Labeling& y, const CrfModel& model, const Matrix& kmat);

/// psi_u[i][l] = -log(max(probs[i][l], clamp)).
UnaryPotentials unary_from_classifier(const MarginalField& probs, double clamp = kProbClamp);

/// Row-wise softmax of the negated potentials, max-subtracted for stability.
MarginalField distribution_from_potentials(const PotentialField& psi);

}  // namespace crfgat
