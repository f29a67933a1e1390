#pragma once

#include <variant>
#include <vector>

#include "crfgat/types.hpp"

namespace crfgat {

/// One term of the Gaussian bilateral mixture:
/// omega * exp(-|p_i-p_j|^2 / (2 sigma_spatial^2) - |X_i-X_j|^2 / (2 sigma_appearance^2)).
struct GaussianComponent {
    double omega = 1.0;
    double sigma_spatial = 1.0;
    double sigma_appearance = 1.0;
};

struct GaussianBilateralKernel {
    std::vector<GaussianComponent> components;
};

/// Standard SVM-style polynomial kernel (scale * <f_i, f_j> + bias)^degree
/// over the flattened (position, observation) feature vector.
struct PolynomialKernel {
    double scale = 1.0;
    double bias = 0.0;
    int degree = 1;
};

/// User-supplied N x N affinity matrix, symmetric with zero diagonal.
struct PrecomputedKernel {
    Matrix matrix;
};

using KernelSpec = std::variant<GaussianBilateralKernel, PolynomialKernel, PrecomputedKernel>;

/// Affinity between the features of node i and node j.
double eval_kernel(const Eigen::Ref<const Vector>& pos_i,
                   const Eigen::Ref<const Vector>& obs_i,
                   const Eigen::Ref<const Vector>& pos_j,
                   const Eigen::Ref<const Vector>& obs_j,
                   const KernelSpec& spec);

/// Dense attention-weight matrix: entry (i,j) = eval_kernel(f_i, f_j),
/// diagonal exactly zero. No row normalization anywhere.
Matrix kernel_matrix(const ObservedSequence& seq, const KernelSpec& spec);

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_spec(const KernelSpec& spec, const ObservedSequence& seq);

/// Sum of mixture weights (the pointwise upper bound of a Gaussian bilateral
/// kernel with non-negative weights); 0 for other variants.
double total_weight(const KernelSpec& spec);

/// Copy of `spec` with every Gaussian component weight multiplied by `t`
/// (Precomputed matrices are scaled entrywise).
KernelSpec scale_kernel_weights(const KernelSpec& spec, double t);

}  // namespace crfgat
