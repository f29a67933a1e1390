#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfgat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Shape or dimension mismatch between model components.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an exact-enumeration request exceeds the configuration cap.
struct InstanceTooLargeError : std::runtime_error {
    explicit InstanceTooLargeError(const std::string& what) : std::runtime_error(what) {}
};

/// Discrete label domain {1, ..., K}. Labels are 0-based internally,
/// 1-based in files and CLI output.
struct LabelSpace {
    int num_labels = 2;

    void validate() const {
        if (num_labels < 2) throw ShapeError("LabelSpace: K must be >= 2");
    }
};

/// Observed nodes: per-node spatial position p_i and observation vector X_i.
/// The feature of node i is the pair (p_i, X_i).
struct ObservedSequence {
    Matrix positions;     // N x d_p
    Matrix observations;  // N x d_x

    int size() const { return static_cast<int>(positions.rows()); }
    int position_dim() const { return static_cast<int>(positions.cols()); }
    int observation_dim() const { return static_cast<int>(observations.cols()); }

    void validate() const {
        if (positions.rows() < 1)
            throw ShapeError("ObservedSequence: N must be >= 1");
        if (observations.rows() != positions.rows())
            throw ShapeError("ObservedSequence: positions/observations row count mismatch");
        if (!positions.allFinite() || !observations.allFinite())
            throw ShapeError("ObservedSequence: non-finite entries");
    }
};

/// N x K table of unary potentials in nats.
struct UnaryPotentials {
    Matrix psi;
};

/// K x K label compatibility table mu(l, l').
struct CompatibilityMatrix {
    Matrix mu;
    bool symmetric = false;

    void validate() const {
        if (mu.rows() != mu.cols()) throw ShapeError("CompatibilityMatrix: must be square");
        if (!mu.allFinite()) throw ShapeError("CompatibilityMatrix: non-finite entries");
        if (symmetric && mu != mu.transpose().eval())
            throw ShapeError("CompatibilityMatrix: symmetric flag set but matrix is asymmetric");
    }
};

/// Length-N label assignment, 0-based.
struct Labeling {
    std::vector<int> y;

    int size() const { return static_cast<int>(y.size()); }
    bool operator==(const Labeling& other) const = default;
};

/// N x K row-stochastic table of per-node label marginals.
struct MarginalField {
    Matrix q;

    void validate(double tol = 1e-12) const;
};

/// N x K table of accumulated potentials (nats); the residual state of the
/// GAT forward pass.
struct PotentialField {
    Matrix psi;
};

}  // namespace crfgat
