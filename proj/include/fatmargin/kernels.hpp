#pragma once

#include "fatmargin/matrix.hpp"

#include <span>
#include <string>

namespace fatmargin {

enum class KernelKind { Linear, Gaussian };

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    // Gaussian only: K(p, q) = exp(-gamma * |p - q|^2).
    double gamma = 0.0;

    static KernelSpec linear() { return {KernelKind::Linear, 0.0}; }
    static KernelSpec gaussian(double gamma);

    void validate() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

double kernel_eval(const KernelSpec& spec, std::span<const double> p, std::span<const double> q);

/// Entry (i, j) = kernel_eval(spec, rows.row(i), cols.row(j)).
Matrix gram_matrix(const KernelSpec& spec, const Matrix& rows, const Matrix& cols);

} // namespace fatmargin
