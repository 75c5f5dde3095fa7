#pragma once

#include "fatmargin/matrix.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fatmargin {

/// M samples of n features with labels in {+1, -1}.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    bool standardized = false;
    // Columns in the source file, label column included (0 when not loaded
    // from a file).
    std::size_t source_columns = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dimension() const noexcept { return features.cols(); }

    std::size_t count(int label) const;

    /// Throws StructuralError on shape mismatch, DataError on labels other
    /// than +/-1 or non-finite features.
    void validate() const;
    /// validate() plus both classes present.
    void require_both_classes() const;

    Dataset subset(std::span<const std::size_t> indices) const;
};

/// Per-column affine map x~ = (x - mean) / scale.
struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> scale;
    bool enabled = false;

    /// Identity transform for n features.
    static StandardizationParams identity(std::size_t n);
    /// Zero mean, unit (population) variance per column; constant columns are
    /// centred only and record scale = 1.
    static StandardizationParams fit(const Matrix& features);

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> invert(std::span<const double> z) const;
    Matrix apply(const Matrix& features) const;
    Dataset apply(const Dataset& data) const;

    friend bool operator==(const StandardizationParams&, const StandardizationParams&) = default;
};

} // namespace fatmargin
