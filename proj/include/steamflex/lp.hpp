#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace steamflex {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        default: return "numerical_failure";
    }
}

struct LpTerm {
    int var;
    double coef;
};

/// Sparse minimization LP: bounded variables, rows of relation {<=, =}, a
/// linear objective plus constant offset. Immutable once handed to solve().
class LinearProgram {
public:
    struct Variable {
        std::string name;
        double lb, ub, cost;
    };
    struct Row {
        std::string name;
        Relation rel;
        double rhs;
        std::size_t begin, end;  // into terms()
    };

    int add_variable(std::string name, double lb, double ub, double cost = 0.0) {
        if (std::isnan(lb) || std::isnan(ub) || !std::isfinite(cost))
            throw std::invalid_argument("add_variable '" + name + "': bad bounds or cost");
        if (lb > ub)
            throw std::invalid_argument("add_variable '" + name + "': lower bound above upper");
        vars_.push_back({std::move(name), lb, ub, cost});
        return static_cast<int>(vars_.size()) - 1;
    }

    void add_cost(int var, double coef) { vars_.at(static_cast<std::size_t>(var)).cost += coef; }

    void set_objective_offset(double c0) { offset_ = c0; }
    double objective_offset() const { return offset_; }

    int add_row(Relation rel, double rhs, const std::vector<LpTerm>& terms,
                std::string name = {}) {
        if (!std::isfinite(rhs)) throw std::invalid_argument("add_row '" + name + "': bad rhs");
        const std::size_t begin = terms_.size();
        for (const auto& t : terms) {
            if (t.var < 0 || t.var >= static_cast<int>(vars_.size()))
                throw std::invalid_argument("add_row '" + name + "': unknown variable index");
            if (!std::isfinite(t.coef))
                throw std::invalid_argument("add_row '" + name + "': non-finite coefficient");
            if (t.coef != 0.0) terms_.push_back(t);
        }
        rows_.push_back({std::move(name), rel, rhs, begin, terms_.size()});
        return static_cast<int>(rows_.size()) - 1;
    }

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    const Variable& variable(int j) const { return vars_.at(static_cast<std::size_t>(j)); }
    const Row& row(int i) const { return rows_.at(static_cast<std::size_t>(i)); }
    const std::vector<LpTerm>& terms() const { return terms_; }

    double row_activity(int i, const std::vector<double>& x) const {
        const Row& r = rows_.at(static_cast<std::size_t>(i));
        double a = 0;
        for (std::size_t k = r.begin; k < r.end; ++k) a += terms_[k].coef * x[static_cast<std::size_t>(terms_[k].var)];
        return a;
    }

    double objective_value(const std::vector<double>& x) const {
        double a = offset_;
        for (std::size_t j = 0; j < vars_.size(); ++j) a += vars_[j].cost * x[j];
        return a;
    }

    /// Plain-text dump for external cross-checking. Format:
    ///   lp <n_vars> <n_rows> <offset>
    ///   var <index> <name> <lb> <ub> <cost>        (one per variable)
    ///   row <index> <name> <le|eq> <rhs> <nterms> { <var_index> <coef> }...
    /// Infinite bounds print as -inf / inf.
    void dump(std::ostream& os) const {
        auto num = [](double v) {
            if (v == kInf) return std::string("inf");
            if (v == -kInf) return std::string("-inf");
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        os << "lp " << vars_.size() << ' ' << rows_.size() << ' ' << num(offset_) << '\n';
        for (std::size_t j = 0; j < vars_.size(); ++j)
            os << "var " << j << ' ' << (vars_[j].name.empty() ? "_" : vars_[j].name) << ' '
               << num(vars_[j].lb) << ' ' << num(vars_[j].ub) << ' ' << num(vars_[j].cost)
               << '\n';
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const Row& r = rows_[i];
            os << "row " << i << ' ' << (r.name.empty() ? "_" : r.name) << ' '
               << (r.rel == Relation::Equal ? "eq" : "le") << ' ' << num(r.rhs) << ' '
               << (r.end - r.begin);
            for (std::size_t k = r.begin; k < r.end; ++k)
                os << ' ' << terms_[k].var << ' ' << num(terms_[k].coef);
            os << '\n';
        }
    }

private:
    std::vector<Variable> vars_;
    std::vector<Row> rows_;
    std::vector<LpTerm> terms_;
    double offset_ = 0;
};

/// Solver output. Dual convention: y solves  A' y + z - v = c  with
/// z, v >= 0 the multipliers of the lower/upper variable bounds, so rows of
/// relation <= carry y <= 0 at optimality.
struct LpSolution {
    LpStatus status = LpStatus::NumericalFailure;
    double objective = std::numeric_limits<double>::quiet_NaN();  // includes offset
    std::vector<double> x;
    std::vector<double> y;        // one per row
    std::vector<double> z_lower;  // one per variable
    std::vector<double> z_upper;
    int iterations = 0;
    std::string message;
    struct Violation {
        std::string row;
        double amount;
    };
    /// Non-empty on Infeasible: rows that remain violated at the closest
    /// feasible point found by the elastic feasibility phase.
    std::vector<Violation> certificate;
};

struct VerifyReport {
    double max_primal_violation = 0;   // relative, rows and bounds
    double max_dual_violation = 0;     // relative stationarity + sign conditions
    double max_comp_slackness = 0;     // relative complementarity residual
    bool pass = false;
    std::string worst;  // name of the worst-violated row or bound
};

/// Independent optimality check of a claimed-optimal solution: primal
/// feasibility, dual feasibility and complementary slackness, each scaled
/// relative and compared against tol. Purely diagnostic.
inline VerifyReport verify_solution(const LinearProgram& lp, const LpSolution& sol,
                                    double tol) {
    if (sol.status != LpStatus::Optimal)
        throw std::invalid_argument("verify_solution: solution status is not optimal");
    const int n = lp.num_vars(), m = lp.num_rows();
    VerifyReport rep;
    double worst_val = 0;
    auto note = [&](double& slot, double v, const std::string& who) {
        if (v > slot) slot = v;
        if (v > worst_val) {
            worst_val = v;
            rep.worst = who;
        }
    };

    // primal: rows
    for (int i = 0; i < m; ++i) {
        const auto& r = lp.row(i);
        const double act = lp.row_activity(i, sol.x);
        const double resid = r.rel == Relation::Equal ? std::abs(act - r.rhs)
                                                      : std::max(0.0, act - r.rhs);
        note(rep.max_primal_violation, resid / (1.0 + std::abs(r.rhs)),
             r.name.empty() ? ("row#" + std::to_string(i)) : r.name);
    }
    // primal: bounds
    for (int j = 0; j < n; ++j) {
        const auto& v = lp.variable(j);
        const double lo = v.lb == -kInf ? 0.0 : std::max(0.0, v.lb - sol.x[static_cast<std::size_t>(j)]);
        const double hi = v.ub == kInf ? 0.0 : std::max(0.0, sol.x[static_cast<std::size_t>(j)] - v.ub);
        note(rep.max_primal_violation, lo / (1.0 + std::abs(v.lb)), "lb(" + v.name + ")");
        note(rep.max_primal_violation, hi / (1.0 + std::abs(v.ub)), "ub(" + v.name + ")");
    }

    const bool have_duals = !sol.y.empty();
    if (have_duals) {
        // stationarity c - A'y - z + v = 0
        std::vector<double> aty(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < m; ++i) {
            const auto& r = lp.row(i);
            for (std::size_t k = r.begin; k < r.end; ++k)
                aty[static_cast<std::size_t>(lp.terms()[k].var)] +=
                    lp.terms()[k].coef * sol.y[static_cast<std::size_t>(i)];
        }
        double cnorm = 1.0;
        for (int j = 0; j < n; ++j) cnorm = std::max(cnorm, std::abs(lp.variable(j).cost));
        for (int j = 0; j < n; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double resid = lp.variable(j).cost - aty[ju] - sol.z_lower[ju] + sol.z_upper[ju];
            note(rep.max_dual_violation, std::abs(resid) / cnorm,
                 "stationarity(" + lp.variable(j).name + ")");
            note(rep.max_dual_violation, std::max(0.0, -sol.z_lower[ju]) / cnorm,
                 "zl(" + lp.variable(j).name + ")");
            note(rep.max_dual_violation, std::max(0.0, -sol.z_upper[ju]) / cnorm,
                 "zu(" + lp.variable(j).name + ")");
        }
        for (int i = 0; i < m; ++i)
            if (lp.row(i).rel == Relation::LessEqual)
                note(rep.max_dual_violation,
                     std::max(0.0, sol.y[static_cast<std::size_t>(i)]) / cnorm,
                     "sign(" + lp.row(i).name + ")");

        // complementary slackness, scaled by the objective magnitude
        const double oscale = 1.0 + std::abs(sol.objective);
        for (int i = 0; i < m; ++i) {
            const auto& r = lp.row(i);
            if (r.rel != Relation::LessEqual) continue;
            const double slack = r.rhs - lp.row_activity(i, sol.x);
            note(rep.max_comp_slackness,
                 std::abs(sol.y[static_cast<std::size_t>(i)] * slack) / oscale,
                 "cs(" + r.name + ")");
        }
        for (int j = 0; j < n; ++j) {
            const auto& v = lp.variable(j);
            const auto ju = static_cast<std::size_t>(j);
            if (v.lb != -kInf)
                note(rep.max_comp_slackness,
                     std::abs(sol.z_lower[ju] * (sol.x[ju] - v.lb)) / oscale,
                     "cs_lb(" + v.name + ")");
            if (v.ub != kInf)
                note(rep.max_comp_slackness,
                     std::abs(sol.z_upper[ju] * (v.ub - sol.x[ju])) / oscale,
                     "cs_ub(" + v.name + ")");
        }
    }

    rep.pass = rep.max_primal_violation <= tol &&
               (!have_duals || (rep.max_dual_violation <= tol && rep.max_comp_slackness <= tol));
    return rep;
}

}  // namespace steamflex
