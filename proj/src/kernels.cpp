#include "fatmargin/kernels.hpp"

#include "fatmargin/error.hpp"

#include <cmath>

namespace fatmargin {

KernelSpec KernelSpec::gaussian(double gamma)
{
    KernelSpec s{KernelKind::Gaussian, gamma};
    s.validate();
    return s;
}

void KernelSpec::validate() const
{
    if (kind == KernelKind::Gaussian && !(gamma > 0.0 && std::isfinite(gamma)))
        throw ConfigError("Gaussian kernel requires gamma > 0");
}

std::string to_string(KernelKind kind)
{
    return kind == KernelKind::Linear ? "linear" : "gaussian";
}

KernelKind kernel_kind_from_string(const std::string& name)
{
    if (name == "linear")
        return KernelKind::Linear;
    if (name == "gaussian" || name == "rbf")
        return KernelKind::Gaussian;
    throw ConfigError("unknown kernel '" + name + "'");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> p, std::span<const double> q)
{
    if (p.size() != q.size())
        throw StructuralError("kernel arguments have lengths " + std::to_string(p.size()) + " and "
                              + std::to_string(q.size()));
    double acc = 0.0;
    if (spec.kind == KernelKind::Linear) {
        for (std::size_t d = 0; d < p.size(); ++d)
            acc += p[d] * q[d];
        return acc;
    }
    for (std::size_t d = 0; d < p.size(); ++d) {
        const double diff = p[d] - q[d];
        acc += diff * diff;
    }
    return std::exp(-spec.gamma * acc);
}

Matrix gram_matrix(const KernelSpec& spec, const Matrix& rows, const Matrix& cols)
{
    spec.validate();
    if (rows.cols() != cols.cols())
        throw StructuralError("Gram matrix operands have dimensions " + std::to_string(rows.cols())
                              + " and " + std::to_string(cols.cols()));
    Matrix k(rows.rows(), cols.rows());
    const bool same = &rows == &cols;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        for (std::size_t j = same ? i : 0; j < cols.rows(); ++j) {
            const double v = kernel_eval(spec, rows.row(i), cols.row(j));
            k(i, j) = v;
            if (same)
                k(j, i) = v;
        }
    }
    return k;
}

} // namespace fatmargin
