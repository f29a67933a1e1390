#include "crfgat/meanfield.hpp"

#include <cmath>

#include "crfgat/exact.hpp"

namespace crfgat {

namespace {

void check_field(const MarginalField& q, const CrfModel& model) {
    if (q.q.rows() != model.num_nodes() || q.q.cols() != model.num_labels())
        throw ShapeError("mean-field step: field shape does not match model");
}

MarginalField normalize_from_potentials(const Matrix& psi) {
    return distribution_from_potentials(PotentialField{psi});
}

}  // namespace

MarginalField init_marginals(const CrfModel& model) {
    return normalize_from_potentials(model.unary.psi);
}

MarginalField mf_step_eq6(const MarginalField& q, const CrfModel& model) {
    check_field(q, model);
    const Matrix kmat = kernel_matrix(model.sequence, model.kernel);
    Matrix a = kmat * q.q;                               // A[i][l'], diagonal of kmat is 0
    Matrix b = a * model.compatibility.mu.transpose();   // B[i][l]
    return normalize_from_potentials(model.unary.psi + b);
}

MarginalField mf_step_eq7(const MarginalField& q, const CrfModel& model) {
    check_field(q, model);
    const Matrix kmat = kernel_matrix(model.sequence, model.kernel);
    Matrix a = q.q * model.compatibility.mu.transpose();  // A[j][l]
    Matrix b = kmat * a;                                  // B[i][l]
    return normalize_from_potentials(model.unary.psi + b);
}

MarginalField mf_update_node(const MarginalField& q, const CrfModel& model, int node) {
    check_field(q, model);
    if (node < 0 || node >= model.num_nodes())
        throw ShapeError("mf_update_node: node index out of range");
    const Matrix kmat = kernel_matrix(model.sequence, model.kernel);
    MarginalField out = q;
    Eigen::RowVectorXd a = kmat.row(node) * out.q;
    Eigen::RowVectorXd b = a * model.compatibility.mu.transpose();
    Eigen::RowVectorXd logits = -(model.unary.psi.row(node) + b);
    Eigen::RowVectorXd e = (logits.array() - logits.maxCoeff()).exp();
    out.q.row(node) = e / e.sum();
    return out;
}

MarginalField mf_step_sequential(const MarginalField& q, const CrfModel& model) {
    check_field(q, model);
    MarginalField out = q;
    for (int i = 0; i < model.num_nodes(); ++i) out = mf_update_node(out, model, i);
    return out;
}

std::pair<MarginalField, MeanFieldDiagnostics> run_mean_field(const CrfModel& model,
                                                              const MeanFieldConfig& cfg) {
    cfg.validate();
    model.validate();
    MarginalField q = init_marginals(model);
    MeanFieldDiagnostics diag;
    const bool kl_ok = cfg.record_kl && configuration_count(model) <= kDefaultEnumerationCap;

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        MarginalField next;
        switch (cfg.schedule) {
            case MfSchedule::Sequential:
                next = mf_step_sequential(q, model);
                break;
            case MfSchedule::Parallel:
                next = (cfg.order == MfOrder::KernelFirst) ? mf_step_eq6(q, model)
                                                           : mf_step_eq7(q, model);
                break;
        }
        double change = (next.q - q.q).cwiseAbs().maxCoeff();
        q = std::move(next);
        diag.iterations_run = iter + 1;
        diag.linf_trace.push_back(change);
        if (kl_ok) diag.kl_trace.push_back(exact_kl(q, model));
        if (change < cfg.tol) {
            diag.converged = true;
            break;
        }
    }
    return {std::move(q), std::move(diag)};
}

Labeling decode_argmax(const MarginalField& q) {
    Labeling out;
    out.y.resize(q.q.rows());
    for (Eigen::Index i = 0; i < q.q.rows(); ++i) {
        int best = 0;
        for (Eigen::Index l = 1; l < q.q.cols(); ++l)
            if (q.q(i, l) > q.q(i, best)) best = static_cast<int>(l);
        out.y[i] = best;
    }
    return out;
}

}  // namespace crfgat
