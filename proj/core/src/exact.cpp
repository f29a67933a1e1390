#include "crfgat/exact.hpp"

#include <cmath>
#include <limits>

namespace crfgat {

namespace {

// Odometer over labelings in lexicographic order (last node fastest).
bool advance(Labeling& y, int k) {
    for (int i = y.size() - 1; i >= 0; --i) {
        if (++y.y[i] < k) return true;
        y.y[i] = 0;
    }
    return false;
}

std::uint64_t checked_count(const CrfModel& model, std::uint64_t cap, const char* op) {
    std::uint64_t count = configuration_count(model);
    if (count > cap)
        throw InstanceTooLargeError(std::string(op) + ": K^N = " + std::to_string(count) +
                                    " exceeds enumeration cap " + std::to_string(cap));
    return count;
}

}  // namespace

std::uint64_t configuration_count(const CrfModel& model) {
    std::uint64_t count = 1;
    const auto k = static_cast<std::uint64_t>(model.num_labels());
    for (int i = 0; i < model.num_nodes(); ++i) {
        if (count > (std::numeric_limits<std::uint64_t>::max() / k))
            return std::numeric_limits<std::uint64_t>::max();
        count *= k;
    }
    return count;
}

ExactResult enumerate_exact(const CrfModel& model, std::uint64_t cap) {
    model.validate();
    checked_count(model, cap, "enumerate_exact");
    const int n = model.num_nodes();
    const int k = model.num_labels();
    const Matrix kmat = kernel_matrix(model.sequence, model.kernel);

    // Pass 1: minimum energy (MAP, and the shift for stable exponentials).
    ExactResult result;
    result.map_energy = std::numeric_limits<double>::infinity();
    Labeling y{std::vector<int>(n, 0)};
    do {
        double e = gibbs_energy(y, model, kmat);
        if (e < result.map_energy) {  // strict: keeps the lexicographically first argmin
            result.map_energy = e;
            result.map_labeling = y;
        }
    } while (advance(y, k));

    // Pass 2: partition function and marginals relative to the minimum.
    double z_shifted = 0.0;
    Matrix counts = Matrix::Zero(n, k);
    y.y.assign(n, 0);
    do {
        double w = std::exp(-(gibbs_energy(y, model, kmat) - result.map_energy));
        z_shifted += w;
        for (int i = 0; i < n; ++i) counts(i, y.y[i]) += w;
    } while (advance(y, k));

    result.log_Z = std::log(z_shifted) - result.map_energy;
    result.marginals.q = counts / z_shifted;
    return result;
}

double exact_kl(const MarginalField& q, const CrfModel& model, std::uint64_t cap) {
    checked_count(model, cap, "exact_kl");
    const int n = model.num_nodes();
    const int k = model.num_labels();
    if (q.q.rows() != n || q.q.cols() != k) throw ShapeError("exact_kl: field shape mismatch");
    const Matrix kmat = kernel_matrix(model.sequence, model.kernel);
    const double log_z = enumerate_exact(model, cap).log_Z;

    double kl = 0.0;
    Labeling y{std::vector<int>(n, 0)};
    do {
        double qy = 1.0;
        for (int i = 0; i < n; ++i) qy *= q.q(i, y.y[i]);
        if (qy > 0.0) {
            double log_p = -gibbs_energy(y, model, kmat) - log_z;
            kl += qy * (std::log(qy) - log_p);
        }
    } while (advance(y, k));
    return kl;
}

}  // namespace crfgat
