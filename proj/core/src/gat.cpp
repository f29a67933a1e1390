#include "crfgat/gat.hpp"

namespace crfgat {

void CrfGatModel::validate() const {
    label_space.validate();
    if (layers.empty()) throw ShapeError("CrfGatModel: at least one layer required");
    const int k = label_space.num_labels;
    for (size_t m = 0; m < layers.size(); ++m) {
        layers[m].mu.validate();
        if (layers[m].mu.mu.rows() != k)
            throw ShapeError("CrfGatModel: layer " + std::to_string(m) +
                             " compatibility size does not match K");
    }
    if (unary_params.bias.size() != 0 && unary_params.num_labels() != k)
        throw ShapeError("CrfGatModel: unary classifier output size does not match K");
}

std::pair<PotentialField, Matrix> gat_layer(const PotentialField& psi, const ObservedSequence& seq,
                                            const GatLayerParams& params) {
    if (psi.psi.rows() != seq.size())
        throw ShapeError("gat_layer: potential rows do not match sequence length");
    if (psi.psi.cols() != params.mu.mu.rows())
        throw ShapeError("gat_layer: potential columns do not match compatibility size");
    MarginalField p = distribution_from_potentials(psi);
    Matrix v = p.q * params.mu.mu.transpose();       // V[i][l] = sum_l' mu[l][l'] P[i][l']
    Matrix alpha = kernel_matrix(seq, params.kernel);  // zero diagonal
    Matrix r = alpha * v;
    return {PotentialField{psi.psi + r}, std::move(r)};
}

std::pair<PotentialField, GatTrace> gat_forward(const CrfGatModel& model,
                                                const ObservedSequence& seq,
                                                const UnaryPotentials& unary, bool keep_trace) {
    model.validate();
    if (unary.psi.rows() != seq.size() || unary.psi.cols() != model.label_space.num_labels)
        throw ShapeError("gat_forward: unary potential shape mismatch");
    PotentialField psi{unary.psi};
    GatTrace trace;
    for (int m = 0; m < model.depth(); ++m) {
        if (keep_trace) trace.distributions.push_back(distribution_from_potentials(psi));
        auto [next, residual] = gat_layer(psi, seq, model.layer(m));
        psi = std::move(next);
        if (keep_trace) {
            trace.residuals.push_back(std::move(residual));
            trace.potentials.push_back(psi);
        }
    }
    return {std::move(psi), std::move(trace)};
}

Labeling decode_argmin(const PotentialField& psi) {
    if (!psi.psi.allFinite()) throw ShapeError("decode_argmin: non-finite potentials");
    Labeling out;
    out.y.resize(psi.psi.rows());
    for (Eigen::Index i = 0; i < psi.psi.rows(); ++i) {
        int best = 0;
        for (Eigen::Index l = 1; l < psi.psi.cols(); ++l)
            if (psi.psi(i, l) < psi.psi(i, best)) best = static_cast<int>(l);
        out.y[i] = best;
    }
    return out;
}

}  // namespace crfgat
