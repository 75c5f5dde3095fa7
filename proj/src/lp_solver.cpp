#include "fatmargin/lp.hpp"

#include "fatmargin/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fatmargin {

std::size_t LPProblem::add_variable(VariableBounds b, double cost)
{
    objective.push_back(cost);
    bounds.push_back(b);
    for (auto& c : constraints)
        c.coefficients.push_back(0.0);
    return objective.size() - 1;
}

void LPProblem::add_constraint(std::vector<double> coefficients, Relation rel, double rhs)
{
    constraints.push_back({std::move(coefficients), rel, rhs});
}

void LPProblem::validate() const
{
    const auto n = objective.size();
    if (bounds.size() != n)
        throw StructuralError("LP has " + std::to_string(n) + " objective coefficients but "
                              + std::to_string(bounds.size()) + " variable bounds");
    for (std::size_t j = 0; j < n; ++j) {
        const auto& b = bounds[j];
        if (std::isnan(b.lower) || std::isnan(b.upper) || b.lower > b.upper
            || b.lower == kInf || b.upper == -kInf)
            throw StructuralError("variable " + std::to_string(j) + " has invalid bounds");
        if (!std::isfinite(objective[j]))
            throw StructuralError("objective coefficient " + std::to_string(j) + " is not finite");
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        if (c.coefficients.size() != n)
            throw StructuralError("constraint " + std::to_string(i) + " has "
                                  + std::to_string(c.coefficients.size())
                                  + " coefficients, expected " + std::to_string(n));
        if (!std::isfinite(c.rhs)
            || !std::all_of(c.coefficients.begin(), c.coefficients.end(),
                            [](double v) { return std::isfinite(v); }))
            throw StructuralError("constraint " + std::to_string(i) + " has non-finite entries");
    }
}

std::string to_string(LPStatus status)
{
    switch (status) {
    case LPStatus::Optimal: return "Optimal";
    case LPStatus::Infeasible: return "Infeasible";
    case LPStatus::Unbounded: return "Unbounded";
    case LPStatus::IterationLimit: return "IterationLimit";
    case LPStatus::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

namespace {

// How an original variable maps onto a nonnegative (or free) column.
enum class VarMode {
    Shift,   // x = lower + x'
    Reflect, // x = upper - x'
    Free,    // x = x'
};

struct VarMap {
    VarMode mode;
    double base;
};

using Vec = Eigen::VectorXd;

// Revised primal simplex on  min c.x  s.t.  A x = b (b >= 0), x >= 0 except
// free columns. Columns are the transformed structurals followed by one slack
// per inequality row; row r also owns an implicit artificial unit column.
// The basis is kept as a dense LU factorization plus a product-form eta file
// that is folded back in every kRefactorInterval updates.
class Simplex {
public:
    Simplex(const LPProblem& problem, const LPOptions& options)
        : problem_(problem), opt_(options)
    {
        build();
    }

    LPSolution run()
    {
        LPSolution sol;
        limit_ = opt_.max_iterations != 0 ? opt_.max_iterations
                                          : 50 * (problem_.num_variables() + problem_.constraints.size()) + 50;
        refactor();

        if (num_artificial_ > 0) {
            const auto first = iterate(Phase::One);
            if (first != PhaseResult::Optimal) {
                sol.status = first == PhaseResult::Numerical ? LPStatus::NumericalFailure : LPStatus::IterationLimit;
                return finish(std::move(sol));
            }
            double infeas = 0.0;
            for (std::size_t p = 0; p < m_; ++p)
                if (is_artificial(basis_[p]))
                    infeas += std::max(0.0, xb_[static_cast<Eigen::Index>(p)]);
            if (infeas > opt_.feasibility_tolerance * (1.0 + rhs_scale_)) {
                sol.status = LPStatus::Infeasible;
                return finish(std::move(sol));
            }
        }

        switch (iterate(Phase::Two)) {
        case PhaseResult::Optimal: sol.status = LPStatus::Optimal; break;
        case PhaseResult::Unbounded:
            sol.status = LPStatus::Unbounded;
            sol.ray = ray_;
            break;
        case PhaseResult::Limit: sol.status = LPStatus::IterationLimit; break;
        case PhaseResult::Numerical: sol.status = LPStatus::NumericalFailure; break;
        }
        return finish(std::move(sol));
    }

private:
    enum class Phase { One, Two };
    enum class PhaseResult { Optimal, Unbounded, Limit, Numerical };

    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    static constexpr std::size_t kRefactorInterval = 64;
    static constexpr double kRayTolerance = 1e-9;
    static constexpr double kRaySlope = 1e-6;
    // Bounded basic variables may drift this far (relative) below zero.
    static constexpr double kDriftTolerance = 5e-8;
    // Smallest accepted pivot relative to the largest entry of its column.
    static constexpr double kMinStability = 1e-7;
    static constexpr double kMaxStability = 1e-3;

    struct Eta {
        Eigen::Index row;
        Vec alpha;
    };

    bool is_artificial(std::size_t col) const { return col >= ncol_; }
    bool is_free(std::size_t col) const { return col < nstruct_ && map_[col].mode == VarMode::Free; }

    void build()
    {
        problem_.validate();
        const auto n = problem_.num_variables();
        nstruct_ = n;
        map_.resize(n);
        std::vector<std::size_t> upper_rows;
        for (std::size_t j = 0; j < n; ++j) {
            const auto& b = problem_.bounds[j];
            if (std::isfinite(b.lower)) {
                map_[j] = {VarMode::Shift, b.lower};
                if (std::isfinite(b.upper))
                    upper_rows.push_back(j);
            } else if (std::isfinite(b.upper)) {
                map_[j] = {VarMode::Reflect, b.upper};
            } else {
                map_[j] = {VarMode::Free, 0.0};
            }
        }

        struct Row {
            std::vector<std::pair<std::size_t, double>> a;
            Relation rel;
            double rhs;
        };
        std::vector<Row> rows;
        rows.reserve(problem_.constraints.size() + upper_rows.size());
        for (const auto& c : problem_.constraints) {
            Row row{{}, c.relation, c.rhs};
            for (std::size_t j = 0; j < n; ++j) {
                const double a = c.coefficients[j];
                if (a == 0.0)
                    continue;
                row.a.emplace_back(j, map_[j].mode == VarMode::Reflect ? -a : a);
                row.rhs -= a * map_[j].base;
            }
            rows.push_back(std::move(row));
        }
        for (auto j : upper_rows)
            rows.push_back({{{j, 1.0}}, Relation::LessEqual, problem_.bounds[j].upper - problem_.bounds[j].lower});

        // Normalize to rhs >= 0; homogeneous >= rows become <= rows so that a
        // slack can start in the basis instead of an artificial.
        std::size_t nslack = 0;
        for (auto& row : rows) {
            if (row.rhs < 0.0 || (row.rhs == 0.0 && row.rel == Relation::GreaterEqual)) {
                for (auto& e : row.a)
                    e.second = -e.second;
                row.rhs = -row.rhs;
                if (row.rel == Relation::LessEqual)
                    row.rel = Relation::GreaterEqual;
                else if (row.rel == Relation::GreaterEqual)
                    row.rel = Relation::LessEqual;
            }
            if (row.rel != Relation::Equal)
                ++nslack;
            rhs_scale_ = std::max(rhs_scale_, row.rhs);
        }

        m_ = rows.size();
        ncol_ = n + nslack;
        cols_.assign(ncol_, {});
        cost_.assign(ncol_, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            cost_[j] = map_[j].mode == VarMode::Reflect ? -problem_.objective[j] : problem_.objective[j];
        rhs_ = Vec::Zero(static_cast<Eigen::Index>(m_));
        basis_.assign(m_, kNone);
        position_.assign(ncol_ + m_, kNone);

        std::size_t slack = n;
        for (std::size_t r = 0; r < m_; ++r) {
            const auto& row = rows[r];
            for (const auto& [j, a] : row.a)
                cols_[j].emplace_back(r, a);
            rhs_[static_cast<Eigen::Index>(r)] = row.rhs;
            std::size_t basic = ncol_ + r;
            if (row.rel == Relation::LessEqual) {
                cols_[slack].emplace_back(r, 1.0);
                basic = slack++;
            } else if (row.rel == Relation::GreaterEqual) {
                cols_[slack++].emplace_back(r, -1.0);
            }
            if (is_artificial(basic))
                ++num_artificial_;
            basis_[r] = basic;
            position_[basic] = r;
        }
    }

    // Refactorizes the basis and recomputes the basic values. Returns false
    // when round-off has pushed a bounded basic variable out of its bounds.
    bool refactor()
    {
        const auto m = static_cast<Eigen::Index>(m_);
        Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t p = 0; p < m_; ++p) {
            const auto col = basis_[p];
            if (is_artificial(col)) {
                basis_matrix(static_cast<Eigen::Index>(col - ncol_), static_cast<Eigen::Index>(p)) = 1.0;
                continue;
            }
            for (const auto& [r, a] : cols_[col])
                basis_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) = a;
        }
        lu_.compute(basis_matrix);
        etas_.clear();
        excluded_.assign(ncol_, false);
        xb_ = ftran(rhs_);

        const double tol = kDriftTolerance * (1.0 + rhs_scale_);
        for (std::size_t p = 0; p < m_; ++p) {
            const double v = xb_[static_cast<Eigen::Index>(p)];
            if (!is_free(basis_[p]) && v < -tol)
                return false;
            if (phase_ == Phase::Two && is_artificial(basis_[p]) && v > tol)
                return false;
        }
        checkpoint_ = basis_;
        return true;
    }

    // Returns to the last basis that refactored cleanly and demands better
    // conditioned pivots from here on. False once no stricter rule is left.
    bool roll_back()
    {
        if (stability_ >= kMaxStability)
            return false;
        stability_ = std::min(stability_ * 100.0, kMaxStability);
        basis_ = checkpoint_;
        std::fill(position_.begin(), position_.end(), kNone);
        for (std::size_t p = 0; p < m_; ++p)
            position_[basis_[p]] = p;
        return refactor();
    }

    // Refactorization inside the main loop; recovers from drift if needed.
    bool checked_refactor() { return refactor() || roll_back(); }

    Vec column(std::size_t j) const
    {
        Vec v = Vec::Zero(static_cast<Eigen::Index>(m_));
        for (const auto& [r, a] : cols_[j])
            v[static_cast<Eigen::Index>(r)] = a;
        return v;
    }

    Vec ftran(const Vec& v) const
    {
        Vec x = lu_.solve(v);
        for (const auto& eta : etas_) {
            const double xr = x[eta.row] / eta.alpha[eta.row];
            x -= xr * eta.alpha;
            x[eta.row] = xr;
        }
        return x;
    }

    Vec btran(Vec c) const
    {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            const double ar = it->alpha[it->row];
            const double cr = c[it->row];
            c[it->row] = (cr - (it->alpha.dot(c) - ar * cr)) / ar;
        }
        return lu_.transpose().solve(c);
    }

    double basic_cost(std::size_t col, Phase phase) const
    {
        if (phase == Phase::One)
            return is_artificial(col) ? 1.0 : 0.0;
        return is_artificial(col) ? 0.0 : cost_[col];
    }

    // Reduced costs of all non-basic columns; basic columns get 0.
    void price(Phase phase)
    {
        Vec cb(static_cast<Eigen::Index>(m_));
        for (std::size_t p = 0; p < m_; ++p)
            cb[static_cast<Eigen::Index>(p)] = basic_cost(basis_[p], phase);
        const Vec y = btran(cb);
        reduced_.assign(ncol_, 0.0);
        for (std::size_t j = 0; j < ncol_; ++j) {
            if (position_[j] != kNone)
                continue;
            double d = phase == Phase::One ? 0.0 : cost_[j];
            for (const auto& [r, a] : cols_[j])
                d -= y[static_cast<Eigen::Index>(r)] * a;
            reduced_[j] = d;
        }
    }

    // Entering column and its direction (+1 increase, -1 decrease for free
    // columns), or kNone at optimality.
    std::size_t choose_entering(bool bland, double& direction) const
    {
        std::size_t best = kNone;
        double best_score = opt_.optimality_tolerance;
        for (std::size_t j = 0; j < ncol_; ++j) {
            if (position_[j] != kNone || excluded_[j])
                continue;
            const double d = reduced_[j];
            const double score = is_free(j) ? std::abs(d) : -d;
            if (score <= opt_.optimality_tolerance)
                continue;
            if (bland) {
                direction = d < 0.0 ? 1.0 : -1.0;
                return j;
            }
            if (score > best_score) {
                best_score = score;
                best = j;
                direction = d < 0.0 ? 1.0 : -1.0;
            }
        }
        return best;
    }

    // Harris two-pass ratio test on the directed column. Returns the leaving
    // position or kNone when nothing blocks.
    std::size_t choose_leaving(const Vec& alpha, Phase phase, bool bland, double& step) const
    {
        const double delta = opt_.feasibility_tolerance;
        const double piv_tol = opt_.pivot_tolerance * std::max(1.0, alpha.cwiseAbs().maxCoeff());

        // Blocking amount of position p: (value, |pivot|) or pivot 0 when it
        // does not block. Artificials still basic in phase two are fixed at 0.
        auto blocking = [&](std::size_t p, double& value, double& pivot) {
            const auto col = basis_[p];
            const auto i = static_cast<Eigen::Index>(p);
            pivot = 0.0;
            if (is_free(col))
                return;
            if (phase == Phase::Two && is_artificial(col)) {
                if (std::abs(alpha[i]) > piv_tol) {
                    pivot = std::abs(alpha[i]);
                    value = alpha[i] > 0.0 ? std::max(xb_[i], 0.0) : std::max(-xb_[i], 0.0);
                }
                return;
            }
            if (alpha[i] > piv_tol) {
                pivot = alpha[i];
                value = std::max(xb_[i], 0.0);
            }
        };

        double bound = kInf;
        for (std::size_t p = 0; p < m_; ++p) {
            double value = 0.0;
            double pivot = 0.0;
            blocking(p, value, pivot);
            if (pivot > 0.0)
                bound = std::min(bound, (value + delta) / pivot);
        }
        if (bound == kInf)
            return kNone;

        std::size_t best = kNone;
        double best_pivot = 0.0;
        double best_ratio = kInf;
        for (std::size_t p = 0; p < m_; ++p) {
            double value = 0.0;
            double pivot = 0.0;
            blocking(p, value, pivot);
            if (pivot == 0.0)
                continue;
            const double ratio = value / pivot;
            if (ratio > bound)
                continue;
            bool take = best == kNone;
            if (!take) {
                if (bland)
                    take = ratio < best_ratio || (ratio == best_ratio && basis_[p] < basis_[best]);
                else
                    take = pivot > best_pivot || (pivot == best_pivot && basis_[p] < basis_[best]);
            }
            if (take) {
                best = p;
                best_pivot = pivot;
                best_ratio = ratio;
            }
        }
        step = best_ratio;
        return best;
    }

    PhaseResult iterate(Phase phase)
    {
        phase_ = phase;
        std::size_t degenerate_run = 0;
        bool fresh = true;  // reduced costs come from a fresh factorization
        bool priced = false;
        while (true) {
            if (!priced) {
                price(phase);
                priced = true;
            }
            double direction = 1.0;
            const bool bland = degenerate_run >= opt_.bland_after;
            const auto s = choose_entering(bland, direction);
            if (s == kNone) {
                if (fresh)
                    return PhaseResult::Optimal;
                // Confirm optimality against a clean factorization.
                if (!checked_refactor())
                    return PhaseResult::Numerical;
                fresh = true;
                priced = false;
                continue;
            }
            if (iterations_ >= limit_)
                return PhaseResult::Limit;

            const Vec alpha = ftran(column(s));
            const Vec directed = direction * alpha;
            double step = 0.0;
            const auto r = choose_leaving(directed, phase, bland, step);
            if (r == kNone && !fresh) {
                if (!checked_refactor())
                    return PhaseResult::Numerical;
                fresh = true;
                priced = false;
                continue;
            }
            if (r == kNone && phase == Phase::Two) {
                build_ray(s, direction, directed);
                if (ray_is_valid())
                    return PhaseResult::Unbounded;
            }
            // Skip columns that are numerically dependent on the basis, and
            // unblocked phase-one columns (phase one is bounded below), until
            // the next refactorization.
            if (r == kNone
                || std::abs(alpha[static_cast<Eigen::Index>(r)]) < stability_ * alpha.cwiseAbs().maxCoeff()) {
                excluded_[s] = true;
                continue;
            }

            xb_ -= step * directed;
            xb_[static_cast<Eigen::Index>(r)] = direction * step;
            const auto leaving = basis_[r];
            position_[leaving] = kNone;
            basis_[r] = s;
            position_[s] = r;
            etas_.push_back({static_cast<Eigen::Index>(r), alpha});
            ++iterations_;
            degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
            fresh = false;
            priced = false;
            if (etas_.size() >= kRefactorInterval) {
                if (!checked_refactor())
                    return PhaseResult::Numerical;
                fresh = true;
            }
        }
    }

    double to_original(std::size_t j, double column_value, bool direction_only) const
    {
        const double base = direction_only ? 0.0 : map_[j].base;
        switch (map_[j].mode) {
        case VarMode::Shift: return base + column_value;
        case VarMode::Reflect: return base - column_value;
        case VarMode::Free: return column_value;
        }
        return 0.0;
    }

    void build_ray(std::size_t s, double direction, const Vec& directed)
    {
        std::vector<double> dir(ncol_, 0.0);
        dir[s] = direction;
        for (std::size_t p = 0; p < m_; ++p)
            if (!is_artificial(basis_[p]))
                dir[basis_[p]] = -directed[static_cast<Eigen::Index>(p)];
        ray_.assign(nstruct_, 0.0);
        for (std::size_t j = 0; j < nstruct_; ++j)
            ray_[j] = to_original(j, dir[j], true);
    }

    // Checks the candidate ray against the original rows and bounds.
    bool ray_is_valid() const
    {
        double scale = 0.0;
        for (double v : ray_)
            scale = std::max(scale, std::abs(v));
        if (scale == 0.0)
            return false;
        const double tol = kRayTolerance * scale;
        double slope = 0.0;
        double cost_scale = 0.0;
        for (std::size_t j = 0; j < nstruct_; ++j) {
            slope += problem_.objective[j] * ray_[j];
            cost_scale = std::max(cost_scale, std::abs(problem_.objective[j]));
            const auto& b = problem_.bounds[j];
            if ((std::isfinite(b.lower) && ray_[j] < -tol) || (std::isfinite(b.upper) && ray_[j] > tol))
                return false;
        }
        if (slope >= -kRaySlope * scale * cost_scale)
            return false;
        for (const auto& c : problem_.constraints) {
            double a = 0.0;
            double mag = 0.0;
            for (std::size_t j = 0; j < nstruct_; ++j) {
                a += c.coefficients[j] * ray_[j];
                mag = std::max(mag, std::abs(c.coefficients[j]));
            }
            const double row_tol = tol * std::max(1.0, mag);
            if ((c.relation != Relation::GreaterEqual && a > row_tol)
                || (c.relation != Relation::LessEqual && a < -row_tol))
                return false;
        }
        return true;
    }

    LPSolution finish(LPSolution sol) const
    {
        sol.point.assign(nstruct_, 0.0);
        sol.objective_value = 0.0;
        for (std::size_t j = 0; j < nstruct_; ++j) {
            const auto p = position_[j];
            const double v = p == kNone ? 0.0 : xb_[static_cast<Eigen::Index>(p)];
            sol.point[j] = to_original(j, v, false);
            sol.objective_value += problem_.objective[j] * sol.point[j];
        }
        sol.iterations = iterations_;
        return sol;
    }

    const LPProblem& problem_;
    LPOptions opt_;
    std::vector<VarMap> map_;
    std::vector<std::vector<std::pair<std::size_t, double>>> cols_;
    std::vector<double> cost_;
    Vec rhs_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> position_;
    std::vector<double> reduced_;
    std::vector<bool> excluded_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    std::vector<Eta> etas_;
    Vec xb_;
    std::vector<double> ray_;
    std::size_t nstruct_ = 0;
    std::size_t m_ = 0;
    std::size_t ncol_ = 0;
    std::size_t num_artificial_ = 0;
    std::size_t iterations_ = 0;
    std::size_t limit_ = 0;
    double rhs_scale_ = 0.0;
    double stability_ = kMinStability;
    Phase phase_ = Phase::One;
    std::vector<std::size_t> checkpoint_;
};

} // namespace

LPSolution solve_lp(const LPProblem& problem, const LPOptions& options)
{
    return Simplex(problem, options).run();
}

ResidualReport check_solution(const LPProblem& problem, const std::vector<double>& point)
{
    if (point.size() != problem.num_variables())
        throw StructuralError("point has " + std::to_string(point.size())
                              + " entries, LP has " + std::to_string(problem.num_variables())
                              + " variables");
    ResidualReport report;
    for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
        const auto& c = problem.constraints[i];
        double lhs = 0.0;
        for (std::size_t j = 0; j < point.size(); ++j)
            lhs += c.coefficients[j] * point[j];
        double violation = 0.0;
        switch (c.relation) {
        case Relation::LessEqual: violation = lhs - c.rhs; break;
        case Relation::GreaterEqual: violation = c.rhs - lhs; break;
        case Relation::Equal: violation = std::abs(lhs - c.rhs); break;
        }
        if (violation > report.max_constraint_violation) {
            report.max_constraint_violation = violation;
            report.worst_constraint = i;
        }
    }
    for (std::size_t j = 0; j < point.size(); ++j) {
        const auto& b = problem.bounds[j];
        report.max_bound_violation =
            std::max({report.max_bound_violation, b.lower - point[j], point[j] - b.upper});
    }
    return report;
}

namespace {

std::string format_bound(double v)
{
    if (v == kInf)
        return "inf";
    if (v == -kInf)
        return "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double parse_bound(const std::string& s)
{
    if (s == "inf" || s == "+inf")
        return kInf;
    if (s == "-inf")
        return -kInf;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw FormatError("bad number in LP text: '" + s + "'");
    }
    if (used != s.size())
        throw FormatError("bad number in LP text: '" + s + "'");
    return v;
}

} // namespace

void write_lp_text(std::ostream& out, const LPProblem& problem)
{
    const auto old_precision = out.precision(17);
    out << "objective";
    for (double c : problem.objective)
        out << ' ' << c;
    out << "\nbounds";
    for (const auto& b : problem.bounds)
        out << ' ' << format_bound(b.lower) << ':' << format_bound(b.upper);
    out << '\n';
    for (const auto& c : problem.constraints) {
        for (double a : c.coefficients)
            out << a << ' ';
        switch (c.relation) {
        case Relation::LessEqual: out << "<="; break;
        case Relation::GreaterEqual: out << ">="; break;
        case Relation::Equal: out << '='; break;
        }
        out << ' ' << c.rhs << '\n';
    }
    out.precision(old_precision);
}

LPProblem read_lp_text(std::istream& in)
{
    LPProblem p;
    std::string line;
    bool have_objective = false;
    bool have_bounds = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#')
            continue;
        std::vector<std::string> tokens;
        for (std::string tok; ls >> tok;)
            tokens.push_back(tok);
        if (head == "objective") {
            for (const auto& t : tokens)
                p.objective.push_back(parse_bound(t));
            have_objective = true;
        } else if (head == "bounds") {
            for (const auto& t : tokens) {
                auto colon = t.find(':', 1);
                if (colon == std::string::npos)
                    throw FormatError("bound '" + t + "' is not lower:upper");
                p.bounds.push_back({parse_bound(t.substr(0, colon)), parse_bound(t.substr(colon + 1))});
            }
            have_bounds = true;
        } else {
            tokens.insert(tokens.begin(), head);
            if (tokens.size() < 2)
                throw FormatError("constraint line too short: '" + line + "'");
            const auto& rel = tokens[tokens.size() - 2];
            Constraint c;
            if (rel == "<=")
                c.relation = Relation::LessEqual;
            else if (rel == ">=")
                c.relation = Relation::GreaterEqual;
            else if (rel == "=")
                c.relation = Relation::Equal;
            else
                throw FormatError("unknown relation '" + rel + "'");
            c.rhs = parse_bound(tokens.back());
            for (std::size_t k = 0; k + 2 < tokens.size(); ++k)
                c.coefficients.push_back(parse_bound(tokens[k]));
            p.constraints.push_back(std::move(c));
        }
    }
    if (!have_objective || !have_bounds)
        throw FormatError("LP text is missing the objective or bounds header");
    p.validate();
    return p;
}

} // namespace fatmargin
