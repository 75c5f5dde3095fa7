#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace fatmargin {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Constraint {
    std::vector<double> coefficients;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;

    friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct VariableBounds {
    double lower = 0.0;
    double upper = kInf;

    static VariableBounds free() { return {-kInf, kInf}; }
    static VariableBounds nonnegative() { return {0.0, kInf}; }

    friend bool operator==(const VariableBounds&, const VariableBounds&) = default;
};

/// Minimize objective . x subject to constraints and per-variable bounds.
struct LPProblem {
    std::vector<double> objective;
    std::vector<Constraint> constraints;
    std::vector<VariableBounds> bounds;

    std::size_t num_variables() const noexcept { return objective.size(); }

    /// Appends a variable with zero objective coefficient and no constraint
    /// entries; returns its index.
    std::size_t add_variable(VariableBounds b, double cost = 0.0);
    void add_constraint(std::vector<double> coefficients, Relation rel, double rhs);

    /// Throws StructuralError when lengths disagree or a lower bound exceeds
    /// its upper bound.
    void validate() const;

    friend bool operator==(const LPProblem&, const LPProblem&) = default;
};

// NumericalFailure: round-off made the basis unusable even with the strictest
// pivot rule; the returned point is not trustworthy.
enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string to_string(LPStatus status);

struct LPOptions {
    double feasibility_tolerance = 1e-9;
    double optimality_tolerance = 1e-9;
    double pivot_tolerance = 1e-9;
    // 0 selects 50 * (variables + rows).
    std::size_t max_iterations = 0;
    // Consecutive degenerate pivots tolerated before switching to Bland's rule.
    std::size_t bland_after = 50;
};

struct LPSolution {
    LPStatus status = LPStatus::IterationLimit;
    std::vector<double> point;
    double objective_value = 0.0;
    std::size_t iterations = 0;
    // Improving direction along which the objective decreases without bound.
    // Only filled when status == Unbounded.
    std::vector<double> ray;
};

/// Two-phase revised primal simplex.
LPSolution solve_lp(const LPProblem& problem, const LPOptions& options = {});

struct ResidualReport {
    double max_constraint_violation = 0.0;
    double max_bound_violation = 0.0;
    std::size_t worst_constraint = 0;

    double max_violation() const noexcept
    {
        return max_constraint_violation > max_bound_violation ? max_constraint_violation
                                                              : max_bound_violation;
    }
    bool within(double tolerance) const noexcept { return max_violation() <= tolerance; }
};

ResidualReport check_solution(const LPProblem& problem, const std::vector<double>& point);

// Plain-text dump used for test fixtures:
//   objective <c_1> ... <c_N>
//   bounds <l_1>:<u_1> ... (inf / -inf for infinite ends)
//   <a_1> ... <a_N> <= | >= | = <rhs>     (one line per constraint)
void write_lp_text(std::ostream& out, const LPProblem& problem);
LPProblem read_lp_text(std::istream& in);

} // namespace fatmargin
