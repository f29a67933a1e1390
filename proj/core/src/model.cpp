#include "crfgat/model.hpp"

#include <cmath>

namespace crfgat {

void MarginalField::validate(double tol) const {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        double row_sum = q.row(i).sum();
        if (std::abs(row_sum - 1.0) > tol)
            throw ShapeError("MarginalField: row " + std::to_string(i) + " sums to " +
                             std::to_string(row_sum));
        if ((q.row(i).array() < -tol).any() || (q.row(i).array() > 1.0 + tol).any())
            throw ShapeError("MarginalField: entries outside [0, 1] in row " + std::to_string(i));
    }
}

void CrfModel::validate() const {
    label_space.validate();
    sequence.validate();
    compatibility.validate();
    const int n = num_nodes();
    const int k = num_labels();
    if (unary.psi.rows() != n || unary.psi.cols() != k)
        throw ShapeError("CrfModel: unary table is " + std::to_string(unary.psi.rows()) + "x" +
                         std::to_string(unary.psi.cols()) + ", expected " + std::to_string(n) +
                         "x" + std::to_string(k));
    if (!unary.psi.allFinite()) throw ShapeError("CrfModel: non-finite unary potentials");
    if (compatibility.mu.rows() != k)
        throw ShapeError("CrfModel: compatibility matrix size does not match K");
    auto report = validate_spec(kernel, sequence);
    if (!report.ok()) throw ShapeError("CrfModel: kernel spec invalid: " + report.violations.front());
}

double gibbs_energy(const Labeling& y, const CrfModel& model, const Matrix& kmat) {
    const int n = model.num_nodes();
    const int k = model.num_labels();
    if (y.size() != n) throw ShapeError("gibbs_energy: labeling length != N");
    double energy = 0.0;
    for (int i = 0; i < n; ++i) {
        if (y.y[i] < 0 || y.y[i] >= k) throw ShapeError("gibbs_energy: label out of range");
        energy += model.unary.psi(i, y.y[i]);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            energy += model.compatibility.mu(y.y[i], y.y[j]) * kmat(i, j);
    return energy;
}

double gibbs_energy(const Labeling& y, const CrfModel& model) {
    return gibbs_energy(y, model, kernel_matrix(model.sequence, model.kernel));
}

UnaryPotentials unary_from_classifier(const MarginalField& probs, double clamp) {
    UnaryPotentials out;
    out.psi = (-probs.q.array().max(clamp).log()).matrix();
    return out;
}

MarginalField distribution_from_potentials(const PotentialField& psi) {
    if (!psi.psi.allFinite()) throw ShapeError("distribution_from_potentials: non-finite input");
    MarginalField out;
    out.q.resize(psi.psi.rows(), psi.psi.cols());
    for (Eigen::Index i = 0; i < psi.psi.rows(); ++i) {
        Eigen::RowVectorXd neg = -psi.psi.row(i);
        Eigen::RowVectorXd e = (neg.array() - neg.maxCoeff()).exp();
        out.q.row(i) = e / e.sum();
    }
    return out;
}

}  // namespace crfgat
