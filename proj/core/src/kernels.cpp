#include "crfgat/kernels.hpp"

#include <cmath>

namespace crfgat {

namespace {

double gaussian_bilateral(const GaussianBilateralKernel& k, double sq_pos, double sq_obs) {
    double value = 0.0;
    for (const auto& c : k.components) {
        value += c.omega * std::exp(-sq_pos / (2.0 * c.sigma_spatial * c.sigma_spatial) -
                                    sq_obs / (2.0 * c.sigma_appearance * c.sigma_appearance));
    }
    return value;
}

double polynomial(const PolynomialKernel& k, const Eigen::Ref<const Vector>& pos_i,
                  const Eigen::Ref<const Vector>& obs_i, const Eigen::Ref<const Vector>& pos_j,
                  const Eigen::Ref<const Vector>& obs_j) {
    double dot = pos_i.dot(pos_j) + obs_i.dot(obs_j);
    return std::pow(k.scale * dot + k.bias, k.degree);
}

}  // namespace

double eval_kernel(const Eigen::Ref<const Vector>& pos_i, const Eigen::Ref<const Vector>& obs_i,
                   const Eigen::Ref<const Vector>& pos_j, const Eigen::Ref<const Vector>& obs_j,
                   const KernelSpec& spec) {
    if (pos_i.size() != pos_j.size() || obs_i.size() != obs_j.size())
        throw ShapeError("eval_kernel: feature dimension mismatch");
    if (const auto* g = std::get_if<GaussianBilateralKernel>(&spec)) {
        return gaussian_bilateral(*g, (pos_i - pos_j).squaredNorm(), (obs_i - obs_j).squaredNorm());
    }
    if (const auto* p = std::get_if<PolynomialKernel>(&spec)) {
        return polynomial(*p, pos_i, obs_i, pos_j, obs_j);
    }
    throw ShapeError("eval_kernel: precomputed kernels have no pointwise form");
}

Matrix kernel_matrix(const ObservedSequence& seq, const KernelSpec& spec) {
    const int n = seq.size();
    if (const auto* pre = std::get_if<PrecomputedKernel>(&spec)) {
        if (pre->matrix.rows() != n || pre->matrix.cols() != n)
            throw ShapeError("kernel_matrix: precomputed matrix is " +
                             std::to_string(pre->matrix.rows()) + "x" +
                             std::to_string(pre->matrix.cols()) + ", sequence has N=" +
                             std::to_string(n));
        return pre->matrix;
    }
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double v = eval_kernel(seq.positions.row(i).transpose(), seq.observations.row(i).transpose(),
                                   seq.positions.row(j).transpose(), seq.observations.row(j).transpose(),
                                   spec);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

ValidationReport validate_spec(const KernelSpec& spec, const ObservedSequence& seq) {
    ValidationReport report;
    if (const auto* g = std::get_if<GaussianBilateralKernel>(&spec)) {
        if (g->components.empty())
            report.violations.push_back("gaussian kernel has no components");
        for (size_t m = 0; m < g->components.size(); ++m) {
            const auto& c = g->components[m];
            if (!(c.sigma_spatial > 0.0))
                report.violations.push_back("component " + std::to_string(m) +
                                            ": sigma_spatial must be positive");
            if (!(c.sigma_appearance > 0.0))
                report.violations.push_back("component " + std::to_string(m) +
                                            ": sigma_appearance must be positive");
        }
    } else if (const auto* p = std::get_if<PolynomialKernel>(&spec)) {
        if (p->degree < 1) report.violations.push_back("polynomial degree must be >= 1");
    } else if (const auto* pre = std::get_if<PrecomputedKernel>(&spec)) {
        const auto& m = pre->matrix;
        if (m.rows() != seq.size() || m.cols() != seq.size()) {
            report.violations.push_back("precomputed matrix size does not match N=" +
                                        std::to_string(seq.size()));
        } else {
            if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
                report.violations.push_back("precomputed matrix is not symmetric");
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                if (m(i, i) != 0.0) {
                    report.violations.push_back("precomputed matrix has nonzero diagonal at " +
                                                std::to_string(i));
                    break;
                }
        }
    }
    return report;
}

double total_weight(const KernelSpec& spec) {
    if (const auto* g = std::get_if<GaussianBilateralKernel>(&spec)) {
        double s = 0.0;
        for (const auto& c : g->components) s += c.omega;
        return s;
    }
    return 0.0;
}

KernelSpec scale_kernel_weights(const KernelSpec& spec, double t) {
    KernelSpec out = spec;
    if (auto* g = std::get_if<GaussianBilateralKernel>(&out)) {
        for (auto& c : g->components) c.omega *= t;
    } else if (auto* pre = std::get_if<PrecomputedKernel>(&out)) {
        pre->matrix *= t;
    } else {
        throw ShapeError("scale_kernel_weights: polynomial kernels have no weight to scale");
    }
    return out;
}

}  // namespace crfgat
