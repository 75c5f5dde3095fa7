#pragma once

#include "fatmargin/dataset.hpp"
#include "fatmargin/kernels.hpp"
#include "fatmargin/lp.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fatmargin {

/// Sign of q_i in the upper constraint h >= y_i f(x_i) +/- q_i. The lower
/// constraint always reads y_i f(x_i) + q_i >= 1.
enum class UpperSlackSign { Plus, Minus };

std::string to_string(UpperSlackSign sign);
UpperSlackSign upper_slack_sign_from_string(const std::string& name);

// Variable layout of the linear LPs: [w_1..w_n, b, h, q_1..q_M].
// Rows 0..M-1 hold the upper constraints, rows M..2M-1 the margin
// constraints, both in sample order.
struct LinearLayout {
    std::size_t n;
    std::size_t samples;

    std::size_t w(std::size_t j) const noexcept { return j; }
    std::size_t b() const noexcept { return n; }
    std::size_t h() const noexcept { return n + 1; }
    std::size_t q(std::size_t i) const noexcept { return n + 2 + i; }
};

// Variable layout of the kernel LP: [lambda_1..lambda_M, b, h, q_1..q_M].
struct KernelLayout {
    std::size_t samples;

    std::size_t lambda(std::size_t j) const noexcept { return j; }
    std::size_t b() const noexcept { return samples; }
    std::size_t h() const noexcept { return samples + 1; }
    std::size_t q(std::size_t i) const noexcept { return samples + 2 + i; }
};

/// min h  s.t.  h >= y_i (w.x_i + b),  y_i (w.x_i + b) >= 1.
LPProblem build_linear_hard_lp(const Dataset& data);

/// min h + C sum s_i q_i  s.t.  h >= y_i (w.x_i + b) + q_i,
/// y_i (w.x_i + b) + q_i >= 1, q_i >= 0.
LPProblem build_linear_soft_lp(const Dataset& data, double C, std::span<const double> weights,
                               UpperSlackSign upper_sign = UpperSlackSign::Plus);

/// Unweighted soft-margin problem, min h + C sum q_i, written out on its own.
LPProblem build_plain_soft_lp(const Dataset& data, double C);

/// Kernel expansion w = sum_j lambda_j phi(x_j) substituted into the fuzzy
/// soft-margin problem.
LPProblem build_kernel_lp(const Matrix& gram, std::span<const int> labels, double C,
                          std::span<const double> weights,
                          UpperSlackSign upper_sign = UpperSlackSign::Plus);

struct TrainConfig {
    double C = 1.0;
    bool fuzzy = false;
    // Membership delta; default_delta() of the training split when unset.
    std::optional<double> delta;
    bool standardize = true;
    UpperSlackSign upper_slack_sign = UpperSlackSign::Plus;
    LPOptions solver;
};

struct KernelTrainConfig : TrainConfig {
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    double sv_tolerance = 1e-6;
};

struct LinearModel {
    std::vector<double> w;
    double b = 0.0;
    double h = 0.0;
    double objective = 0.0;
    double C = 0.0;
    bool hard_margin = false;
    bool fuzzy = false;
    StandardizationParams standardization;
    std::size_t iterations = 0;
};

struct KernelModel {
    // Full expansion over the training set, in training order.
    std::vector<double> lambdas;
    double b = 0.0;
    double h = 0.0;
    double objective = 0.0;
    double C = 0.0;
    bool fuzzy = false;
    KernelSpec kernel;
    // Relative threshold actually used to select the support set.
    double sv_tolerance = 0.0;
    std::vector<std::size_t> support_indices;
    // Standardized training rows of the support set and their coefficients.
    Matrix support_samples;
    std::vector<double> support_lambdas;
    StandardizationParams standardization;
    std::size_t iterations = 0;

    std::size_t support_count() const noexcept { return support_indices.size(); }
};

struct Prediction {
    int label = 1;
    double score = 0.0;
};

/// sign(0) is +1.
inline int sign_label(double score) noexcept { return score >= 0.0 ? 1 : -1; }

LinearModel train_linear_hard(const Dataset& data, const TrainConfig& config = {});

/// Soft-margin linear MCM. Explicit weights override config.fuzzy; otherwise
/// memberships are computed on the (standardized) training data when fuzzy
/// is set, and all ones are used when it is not.
LinearModel train_linear(const Dataset& data, const TrainConfig& config,
                         std::span<const double> weights = {});

KernelModel train_kernel(const Dataset& data, const KernelTrainConfig& config,
                         std::span<const double> weights = {});

/// x is in raw feature coordinates; the stored standardization is applied.
Prediction predict_linear(const LinearModel& model, std::span<const double> x);
Prediction predict_kernel(const KernelModel& model, std::span<const double> x);

/// 0-based indices j with |lambda_j| > tolerance * max |lambda|.
std::vector<std::size_t> extract_support_vectors(std::span<const double> lambdas, double tolerance);

} // namespace fatmargin
