#pragma once

#include <optional>
#include <vector>

#include "crfgat/model.hpp"

namespace crfgat {

enum class MfSchedule { Parallel, Sequential };

/// Summation order inside one update: A-then-B (kernel sum first) or the
/// swapped form (compatibility sum first). Mathematically identical.
enum class MfOrder { KernelFirst, CompatibilityFirst };

struct MeanFieldConfig {
    int max_iter = 10;
    double tol = 1e-6;
    MfSchedule schedule = MfSchedule::Parallel;
    MfOrder order = MfOrder::KernelFirst;
    bool record_kl = false;  // exact KL per iteration; enumeration-cap instances only

    void validate() const {
        if (max_iter < 1) throw ShapeError("MeanFieldConfig: max_iter must be >= 1");
        if (!(tol > 0.0)) throw ShapeError("MeanFieldConfig: tol must be positive");
    }
};

struct MeanFieldDiagnostics {
    int iterations_run = 0;
    bool converged = false;
    std::vector<double> linf_trace;
    std::vector<double> kl_trace;
};

/// Q <- softmax(-psi_u), row-wise.
MarginalField init_marginals(const CrfModel& model);

/// One simultaneous (Jacobi) update, summing the kernel term first:
/// A[i][l'] = sum_{j != i} k(f_i,f_j) Q[j][l'], B[i][l] = sum_{l'} mu[l][l'] A[i][l'].
MarginalField mf_step_eq6(const MarginalField& q, const CrfModel& model);

/// Same update with the cumulative sums swapped:
/// A[j][l] = sum_{l'} mu[l][l'] Q[j][l'], B[i][l] = sum_{j != i} k(f_i,f_j) A[j][l].
MarginalField mf_step_eq7(const MarginalField& q, const CrfModel& model);

/// Coordinate update of a single node's row, all other rows held fixed.
MarginalField mf_update_node(const MarginalField& q, const CrfModel& model, int node);

/// Gauss-Seidel sweep: nodes update one at a time in ascending order, each
/// seeing the freshest rows. KL-monotone, unlike the parallel schedule.
MarginalField mf_step_sequential(const MarginalField& q, const CrfModel& model);

std::pair<MarginalField, MeanFieldDiagnostics> run_mean_field(const CrfModel& model,
                                                              const MeanFieldConfig& cfg);

/// Per node, the label with maximal marginal; ties pick the smallest index.
Labeling decode_argmax(const MarginalField& q);

}  // namespace crfgat
