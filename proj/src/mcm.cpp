#include "fatmargin/mcm.hpp"

#include "fatmargin/error.hpp"
#include "fatmargin/membership.hpp"

#include <algorithm>
#include <cmath>

namespace fatmargin {

std::string to_string(UpperSlackSign sign)
{
    return sign == UpperSlackSign::Plus ? "plus" : "minus";
}

UpperSlackSign upper_slack_sign_from_string(const std::string& name)
{
    if (name == "plus" || name == "+")
        return UpperSlackSign::Plus;
    if (name == "minus" || name == "-")
        return UpperSlackSign::Minus;
    throw ConfigError("upper slack sign must be 'plus' or 'minus', got '" + name + "'");
}

namespace {

// Tolerance for the post-solve feasibility audit of training problems.
constexpr double kAuditTolerance = 1e-7;

void check_C(double C)
{
    if (!(C > 0.0 && std::isfinite(C)))
        throw ConfigError("C must be positive and finite");
}

void check_weights(std::span<const double> weights, std::size_t samples)
{
    if (weights.size() != samples)
        throw ConfigError("expected " + std::to_string(samples) + " sample weights, got "
                          + std::to_string(weights.size()));
    for (double s : weights)
        if (!(s > 0.0 && s <= 1.0))
            throw ConfigError("sample weights must lie in (0, 1]");
}

// Adds the 2M rows shared by the soft formulations. margin(i) fills the
// coefficients of y_i f(x_i) into a row.
template <class Margin>
void add_soft_rows(LPProblem& lp, std::size_t samples, std::size_t h, std::size_t q0,
                   double upper_q, Margin margin)
{
    const auto nvar = lp.num_variables();
    for (std::size_t i = 0; i < samples; ++i) {
        std::vector<double> row(nvar, 0.0);
        margin(i, row, -1.0);
        row[h] = 1.0;
        row[q0 + i] = -upper_q;
        lp.add_constraint(std::move(row), Relation::GreaterEqual, 0.0);
    }
    for (std::size_t i = 0; i < samples; ++i) {
        std::vector<double> row(nvar, 0.0);
        margin(i, row, 1.0);
        row[q0 + i] = 1.0;
        lp.add_constraint(std::move(row), Relation::GreaterEqual, 1.0);
    }
}

auto linear_margin(const Dataset& data, const LinearLayout& lay)
{
    return [&data, lay](std::size_t i, std::vector<double>& row, double scale) {
        const double y = data.labels[i] * scale;
        const auto x = data.features.row(i);
        for (std::size_t j = 0; j < lay.n; ++j)
            row[lay.w(j)] = y * x[j];
        row[lay.b()] = y;
    };
}

void audit(const LPProblem& lp, const LPSolution& sol, double h)
{
    const auto residual = check_solution(lp, sol.point);
    if (!residual.within(kAuditTolerance))
        throw TrainingError("solver returned a point violating the training constraints by "
                                + std::to_string(residual.max_violation()),
                            "Numerical");
    if (h < 1.0 - kAuditTolerance)
        throw TrainingError("optimal h = " + std::to_string(h) + " is below 1", "Numerical");
}

LPSolution solve_training(const LPProblem& lp, const LPOptions& options)
{
    auto sol = solve_lp(lp, options);
    if (sol.status != LPStatus::Optimal)
        throw TrainingError("training LP ended with status " + to_string(sol.status),
                            to_string(sol.status));
    return sol;
}

struct Prepared {
    Dataset data;
    StandardizationParams standardization;
    std::vector<double> weights;
};

Prepared prepare(const Dataset& raw, const TrainConfig& config, std::span<const double> weights,
                 bool weighted)
{
    raw.require_both_classes();
    Prepared p;
    p.standardization = config.standardize ? StandardizationParams::fit(raw.features)
                                           : StandardizationParams::identity(raw.dimension());
    p.data = p.standardization.apply(raw);
    if (!weighted)
        return p;
    check_C(config.C);
    if (!weights.empty()) {
        check_weights(weights, raw.size());
        p.weights.assign(weights.begin(), weights.end());
    } else if (config.fuzzy) {
        p.weights = compute_memberships(p.data, config.delta).values;
    } else {
        p.weights.assign(raw.size(), 1.0);
    }
    return p;
}

} // namespace

LPProblem build_linear_hard_lp(const Dataset& data)
{
    data.validate();
    const LinearLayout lay{data.dimension(), data.size()};
    LPProblem lp;
    for (std::size_t j = 0; j < lay.n + 2; ++j)
        lp.add_variable(VariableBounds::free());
    lp.objective[lay.h()] = 1.0;
    const auto margin = linear_margin(data, lay);
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<double> row(lp.num_variables(), 0.0);
        margin(i, row, -1.0);
        row[lay.h()] = 1.0;
        lp.add_constraint(std::move(row), Relation::GreaterEqual, 0.0);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<double> row(lp.num_variables(), 0.0);
        margin(i, row, 1.0);
        lp.add_constraint(std::move(row), Relation::GreaterEqual, 1.0);
    }
    return lp;
}

LPProblem build_linear_soft_lp(const Dataset& data, double C, std::span<const double> weights,
                               UpperSlackSign upper_sign)
{
    data.validate();
    check_C(C);
    check_weights(weights, data.size());
    const LinearLayout lay{data.dimension(), data.size()};
    LPProblem lp;
    lp.objective.assign(lay.q(0) + data.size(), 0.0);
    lp.bounds.assign(lay.q(0), VariableBounds::free());
    lp.bounds.resize(lp.objective.size(), VariableBounds::nonnegative());
    lp.objective[lay.h()] = 1.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        lp.objective[lay.q(i)] = C * weights[i];
    add_soft_rows(lp, data.size(), lay.h(), lay.q(0), upper_sign == UpperSlackSign::Plus ? 1.0 : -1.0,
                  linear_margin(data, lay));
    return lp;
}

LPProblem build_plain_soft_lp(const Dataset& data, double C)
{
    data.validate();
    check_C(C);
    const std::size_t n = data.dimension();
    const std::size_t m = data.size();
    const std::size_t nvar = n + 2 + m;
    LPProblem lp;
    lp.objective.assign(nvar, 0.0);
    lp.bounds.assign(nvar, VariableBounds::free());
    lp.objective[n + 1] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        lp.objective[n + 2 + i] = C;
        lp.bounds[n + 2 + i] = VariableBounds::nonnegative();
    }
    // h - y_i (w.x_i + b) - q_i >= 0
    for (std::size_t i = 0; i < m; ++i) {
        Constraint c{std::vector<double>(nvar, 0.0), Relation::GreaterEqual, 0.0};
        for (std::size_t j = 0; j < n; ++j)
            c.coefficients[j] = -data.labels[i] * data.features(i, j);
        c.coefficients[n] = -data.labels[i];
        c.coefficients[n + 1] = 1.0;
        c.coefficients[n + 2 + i] = -1.0;
        lp.constraints.push_back(std::move(c));
    }
    // y_i (w.x_i + b) + q_i >= 1
    for (std::size_t i = 0; i < m; ++i) {
        Constraint c{std::vector<double>(nvar, 0.0), Relation::GreaterEqual, 1.0};
        for (std::size_t j = 0; j < n; ++j)
            c.coefficients[j] = data.labels[i] * data.features(i, j);
        c.coefficients[n] = data.labels[i];
        c.coefficients[n + 2 + i] = 1.0;
        lp.constraints.push_back(std::move(c));
    }
    return lp;
}

LPProblem build_kernel_lp(const Matrix& gram, std::span<const int> labels, double C,
                          std::span<const double> weights, UpperSlackSign upper_sign)
{
    if (gram.rows() != gram.cols())
        throw StructuralError("Gram matrix must be square, got " + std::to_string(gram.rows()) + "x"
                              + std::to_string(gram.cols()));
    if (gram.rows() != labels.size())
        throw StructuralError("Gram matrix size does not match the number of labels");
    check_C(C);
    check_weights(weights, labels.size());
    const KernelLayout lay{labels.size()};
    LPProblem lp;
    lp.objective.assign(lay.q(0) + lay.samples, 0.0);
    lp.bounds.assign(lay.q(0), VariableBounds::free());
    lp.bounds.resize(lp.objective.size(), VariableBounds::nonnegative());
    lp.objective[lay.h()] = 1.0;
    for (std::size_t i = 0; i < lay.samples; ++i)
        lp.objective[lay.q(i)] = C * weights[i];
    add_soft_rows(lp, lay.samples, lay.h(), lay.q(0), upper_sign == UpperSlackSign::Plus ? 1.0 : -1.0,
                  [&](std::size_t i, std::vector<double>& row, double scale) {
                      const double y = labels[i] * scale;
                      const auto k = gram.row(i);
                      for (std::size_t j = 0; j < lay.samples; ++j)
                          row[lay.lambda(j)] = y * k[j];
                      row[lay.b()] = y;
                  });
    return lp;
}

LinearModel train_linear_hard(const Dataset& data, const TrainConfig& config)
{
    auto prep = prepare(data, config, {}, false);
    const auto lp = build_linear_hard_lp(prep.data);
    const auto sol = solve_training(lp, config.solver);
    const LinearLayout lay{prep.data.dimension(), prep.data.size()};
    LinearModel model;
    model.w.assign(sol.point.begin(), sol.point.begin() + static_cast<std::ptrdiff_t>(lay.n));
    model.b = sol.point[lay.b()];
    model.h = sol.point[lay.h()];
    model.objective = sol.objective_value;
    model.hard_margin = true;
    model.standardization = std::move(prep.standardization);
    model.iterations = sol.iterations;
    audit(lp, sol, model.h);
    return model;
}

LinearModel train_linear(const Dataset& data, const TrainConfig& config, std::span<const double> weights)
{
    auto prep = prepare(data, config, weights, true);
    const auto lp = build_linear_soft_lp(prep.data, config.C, prep.weights, config.upper_slack_sign);
    const auto sol = solve_training(lp, config.solver);
    const LinearLayout lay{prep.data.dimension(), prep.data.size()};
    LinearModel model;
    model.w.assign(sol.point.begin(), sol.point.begin() + static_cast<std::ptrdiff_t>(lay.n));
    model.b = sol.point[lay.b()];
    model.h = sol.point[lay.h()];
    model.objective = sol.objective_value;
    model.C = config.C;
    model.fuzzy = config.fuzzy || !weights.empty();
    model.standardization = std::move(prep.standardization);
    model.iterations = sol.iterations;
    audit(lp, sol, model.h);
    return model;
}

namespace {

void select_support(KernelModel& model, const Matrix& train, const Matrix& gram, double tolerance)
{
    const auto m = model.lambdas.size();
    std::vector<int> full_labels(m);
    for (std::size_t i = 0; i < m; ++i) {
        double score = model.b;
        for (std::size_t j = 0; j < m; ++j)
            score += model.lambdas[j] * gram(i, j);
        full_labels[i] = sign_label(score);
    }

    // Shrink the threshold until the truncated expansion reproduces every
    // training label of the full expansion; 0 keeps all nonzero terms.
    double tol = tolerance;
    while (true) {
        auto support = extract_support_vectors(model.lambdas, tol);
        bool agree = true;
        for (std::size_t i = 0; i < m && agree; ++i) {
            double score = model.b;
            for (auto j : support)
                score += model.lambdas[j] * gram(i, j);
            agree = sign_label(score) == full_labels[i];
        }
        if (agree || tol == 0.0) {
            model.sv_tolerance = tol;
            model.support_indices = std::move(support);
            break;
        }
        tol = tol < 1e-15 ? 0.0 : tol / 10.0;
    }

    model.support_samples = Matrix(model.support_indices.size(), train.cols());
    model.support_lambdas.clear();
    for (std::size_t k = 0; k < model.support_indices.size(); ++k) {
        const auto j = model.support_indices[k];
        const auto src = train.row(j);
        std::copy(src.begin(), src.end(), model.support_samples.row(k).begin());
        model.support_lambdas.push_back(model.lambdas[j]);
    }
}

} // namespace

KernelModel train_kernel(const Dataset& data, const KernelTrainConfig& config, std::span<const double> weights)
{
    config.kernel.validate();
    if (!(config.sv_tolerance >= 0.0))
        throw ConfigError("sv tolerance must be nonnegative");
    auto prep = prepare(data, config, weights, true);
    const auto gram = gram_matrix(config.kernel, prep.data.features, prep.data.features);
    const auto lp = build_kernel_lp(gram, prep.data.labels, config.C, prep.weights, config.upper_slack_sign);
    const auto sol = solve_training(lp, config.solver);
    const KernelLayout lay{prep.data.size()};

    KernelModel model;
    model.lambdas.assign(sol.point.begin(), sol.point.begin() + static_cast<std::ptrdiff_t>(lay.samples));
    model.b = sol.point[lay.b()];
    model.h = sol.point[lay.h()];
    model.objective = sol.objective_value;
    model.C = config.C;
    model.fuzzy = config.fuzzy || !weights.empty();
    model.kernel = config.kernel;
    model.standardization = std::move(prep.standardization);
    model.iterations = sol.iterations;
    audit(lp, sol, model.h);
    select_support(model, prep.data.features, gram, config.sv_tolerance);
    return model;
}

Prediction predict_linear(const LinearModel& model, std::span<const double> x)
{
    if (x.size() != model.w.size())
        throw StructuralError("sample has " + std::to_string(x.size()) + " features, model expects "
                              + std::to_string(model.w.size()));
    const auto z = model.standardization.apply(x);
    double score = model.b;
    for (std::size_t j = 0; j < z.size(); ++j)
        score += model.w[j] * z[j];
    return {sign_label(score), score};
}

Prediction predict_kernel(const KernelModel& model, std::span<const double> x)
{
    if (x.size() != model.standardization.mean.size())
        throw StructuralError("sample has " + std::to_string(x.size()) + " features, model expects "
                              + std::to_string(model.standardization.mean.size()));
    const auto z = model.standardization.apply(x);
    double score = model.b;
    for (std::size_t k = 0; k < model.support_lambdas.size(); ++k)
        score += model.support_lambdas[k] * kernel_eval(model.kernel, z, model.support_samples.row(k));
    return {sign_label(score), score};
}

std::vector<std::size_t> extract_support_vectors(std::span<const double> lambdas, double tolerance)
{
    if (!(tolerance >= 0.0))
        throw ConfigError("sv tolerance must be nonnegative");
    double largest = 0.0;
    for (double l : lambdas)
        largest = std::max(largest, std::abs(l));
    std::vector<std::size_t> out;
    if (largest == 0.0)
        return out;
    for (std::size_t j = 0; j < lambdas.size(); ++j)
        if (std::abs(lambdas[j]) > tolerance * largest)
            out.push_back(j);
    return out;
}

} // namespace fatmargin
