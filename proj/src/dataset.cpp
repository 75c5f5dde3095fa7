#include "fatmargin/dataset.hpp"

#include "fatmargin/error.hpp"

#include <algorithm>
#include <cmath>

namespace fatmargin {

std::size_t Dataset::count(int label) const
{
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void Dataset::validate() const
{
    if (features.rows() != labels.size())
        throw StructuralError("dataset has " + std::to_string(features.rows()) + " feature rows but "
                              + std::to_string(labels.size()) + " labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != 1 && labels[i] != -1)
            throw DataError("label of sample " + std::to_string(i) + " is not +1 or -1");
    for (double v : features.data())
        if (!std::isfinite(v))
            throw DataError("dataset contains a non-finite feature value");
}

void Dataset::require_both_classes() const
{
    validate();
    if (count(1) == 0 || count(-1) == 0)
        throw DataError("dataset contains a single class");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const
{
    Dataset out;
    out.features = Matrix(indices.size(), dimension());
    out.labels.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto src = features.row(indices[k]);
        std::copy(src.begin(), src.end(), out.features.row(k).begin());
        out.labels.push_back(labels[indices[k]]);
    }
    out.feature_names = feature_names;
    out.standardized = standardized;
    out.source_columns = source_columns;
    return out;
}

StandardizationParams StandardizationParams::identity(std::size_t n)
{
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), false};
}

StandardizationParams StandardizationParams::fit(const Matrix& features)
{
    const auto m = features.rows();
    const auto n = features.cols();
    StandardizationParams p{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), true};
    if (m == 0)
        return p;
    for (std::size_t j = 0; j < n; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            mean += features(i, j);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = features(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(m);
        p.mean[j] = mean;
        const double sd = std::sqrt(var);
        // Columns whose spread is pure round-off count as constant.
        p.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
    }
    return p;
}

std::vector<double> StandardizationParams::apply(std::span<const double> x) const
{
    if (x.size() != mean.size())
        throw StructuralError("sample has " + std::to_string(x.size()) + " features, expected "
                              + std::to_string(mean.size()));
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        z[j] = (x[j] - mean[j]) / scale[j];
    return z;
}

std::vector<double> StandardizationParams::invert(std::span<const double> z) const
{
    if (z.size() != mean.size())
        throw StructuralError("sample has " + std::to_string(z.size()) + " features, expected "
                              + std::to_string(mean.size()));
    std::vector<double> x(z.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        x[j] = z[j] * scale[j] + mean[j];
    return x;
}

Matrix StandardizationParams::apply(const Matrix& features) const
{
    if (features.cols() != mean.size())
        throw StructuralError("feature matrix width does not match standardization");
    Matrix out(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i)
        for (std::size_t j = 0; j < features.cols(); ++j)
            out(i, j) = (features(i, j) - mean[j]) / scale[j];
    return out;
}

Dataset StandardizationParams::apply(const Dataset& data) const
{
    Dataset out = data;
    out.features = apply(data.features);
    out.standardized = enabled;
    return out;
}

} // namespace fatmargin
