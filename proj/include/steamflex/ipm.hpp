#pragma once

// Self-contained sparse LP backend: primal-dual interior point method
// (Mehrotra predictor-corrector) on the bounded-variable form
//
//     min c'x   s.t.  A x = b,   l <= x <= u
//
// after slack augmentation of <= rows. Newton steps solve the symmetric
// quasi-definite augmented system
//
//     [ -(Theta + dp I)   A' ] [dx]   [rhs_d]
//     [  A                dd I ] [dy] = [rhs_p]
//
// with a single symbolic LDL' factorization reused across iterations
// (only the Theta diagonal changes) and iterative refinement against the
// unregularized system. Ruiz equilibration conditions the inputs.
// Infeasibility is classified by an elastic feasibility phase that also
// produces a violated-row certificate.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "steamflex/lp.hpp"

namespace steamflex {

struct SolveOptions {
    double tol = 1e-6;       // relative optimality tolerance
    double feas_tol = 1e-7;  // feasibility threshold for infeasibility classification
    int max_iters = 100;
    bool enable_elastic_phase = true;  // classify non-convergence via elastic LP
    int refine_steps = 4;
    int verbose = 0;  // 1: iteration log on stderr
};

namespace ipm_detail {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vec = Eigen::VectorXd;

struct InternalProblem {
    // full column space: original free/bounded vars followed by slacks
    SpMat A;  // m x N
    Vec b, c, lo, hi;
    int n_orig = 0;             // columns that map back to user variables
    std::vector<int> user_var;  // internal col -> original var index (or -1 for slack)
    std::vector<int> row_user;  // internal row -> original row index
    std::vector<int> slack_of_row;  // internal row -> slack col (or -1)
    double offset = 0;
    // fixed variables removed during presolve
    std::vector<char> is_fixed;     // per original var
    std::vector<double> fixed_val;  // per original var
};

enum class PresolveOutcome { Proceed, Infeasible, TriviallyOptimal };

inline PresolveOutcome build_internal(const LinearProgram& lp, InternalProblem& P,
                                      std::string& message) {
    const int n = lp.num_vars(), m = lp.num_rows();
    P.is_fixed.assign(static_cast<std::size_t>(n), 0);
    P.fixed_val.assign(static_cast<std::size_t>(n), 0.0);
    P.offset = lp.objective_offset();

    std::vector<int> col_of(static_cast<std::size_t>(n), -1);
    int ncols = 0;
    for (int j = 0; j < n; ++j) {
        const auto& v = lp.variable(j);
        if (v.lb == v.ub) {
            P.is_fixed[static_cast<std::size_t>(j)] = 1;
            P.fixed_val[static_cast<std::size_t>(j)] = v.lb;
            P.offset += v.cost * v.lb;
        } else {
            col_of[static_cast<std::size_t>(j)] = ncols++;
        }
    }
    P.n_orig = ncols;

    // rows: substitute fixed variables, drop empty rows after substitution
    std::vector<Triplet> trips;
    std::vector<double> rhs;
    std::vector<double> slack_needed;  // 1 for <=
    for (int i = 0; i < m; ++i) {
        const auto& r = lp.row(i);
        double b = r.rhs;
        bool any = false;
        for (std::size_t k = r.begin; k < r.end; ++k) {
            const int j = lp.terms()[k].var;
            if (P.is_fixed[static_cast<std::size_t>(j)])
                b -= lp.terms()[k].coef * P.fixed_val[static_cast<std::size_t>(j)];
            else
                any = true;
        }
        if (!any) {
            const double viol = r.rel == Relation::Equal ? std::abs(b) : std::max(0.0, -b);
            if (viol > 1e-9 * (1.0 + std::abs(r.rhs))) {
                message = "row '" + r.name + "' is unsatisfiable after fixing variables";
                return PresolveOutcome::Infeasible;
            }
            continue;
        }
        const int row_id = static_cast<int>(rhs.size());
        for (std::size_t k = r.begin; k < r.end; ++k) {
            const int j = lp.terms()[k].var;
            if (!P.is_fixed[static_cast<std::size_t>(j)])
                trips.emplace_back(row_id, col_of[static_cast<std::size_t>(j)],
                                   lp.terms()[k].coef);
        }
        rhs.push_back(b);
        P.row_user.push_back(i);
        slack_needed.push_back(r.rel == Relation::LessEqual ? 1.0 : 0.0);
    }

    const int mi = static_cast<int>(rhs.size());
    int nslack = 0;
    P.slack_of_row.assign(static_cast<std::size_t>(mi), -1);
    for (int i = 0; i < mi; ++i)
        if (slack_needed[static_cast<std::size_t>(i)] > 0) {
            P.slack_of_row[static_cast<std::size_t>(i)] = ncols + nslack;
            trips.emplace_back(i, ncols + nslack, 1.0);
            ++nslack;
        }
    const int N = ncols + nslack;

    P.A.resize(mi, N);
    P.A.setFromTriplets(trips.begin(), trips.end());
    P.A.makeCompressed();
    P.b = Eigen::Map<Vec>(rhs.data(), mi);
    P.c = Vec::Zero(N);
    P.lo = Vec::Constant(N, -kInf);
    P.hi = Vec::Constant(N, kInf);
    P.user_var.assign(static_cast<std::size_t>(N), -1);
    for (int j = 0; j < n; ++j) {
        const int cj = col_of[static_cast<std::size_t>(j)];
        if (cj < 0) continue;
        const auto& v = lp.variable(j);
        P.c[cj] = v.cost;
        P.lo[cj] = v.lb;
        P.hi[cj] = v.ub;
        P.user_var[static_cast<std::size_t>(cj)] = j;
    }
    for (int i = 0; i < mi; ++i) {
        const int sj = P.slack_of_row[static_cast<std::size_t>(i)];
        if (sj >= 0) P.lo[sj] = 0.0;
    }
    if (N == 0) {
        message = "all variables fixed";
        return PresolveOutcome::TriviallyOptimal;
    }
    return PresolveOutcome::Proceed;
}

/// Ruiz equilibration: returns row scales dr and column scales dc such that
/// dr.asDiagonal() * A * dc.asDiagonal() has rows and columns of ~unit
/// infinity norm.
inline void ruiz_scales(const SpMat& A, Vec& dr, Vec& dc, int iters = 10) {
    const int m = static_cast<int>(A.rows()), N = static_cast<int>(A.cols());
    dr = Vec::Ones(m);
    dc = Vec::Ones(N);
    if (m == 0 || A.nonZeros() == 0) return;
    Vec rmax(m), cmax(N);
    for (int it = 0; it < iters; ++it) {
        rmax.setZero();
        cmax.setZero();
        for (int col = 0; col < N; ++col)
            for (SpMat::InnerIterator v(A, col); v; ++v) {
                const double a = std::abs(v.value()) * dr[v.row()] * dc[col];
                rmax[v.row()] = std::max(rmax[v.row()], a);
                cmax[col] = std::max(cmax[col], a);
            }
        for (int i = 0; i < m; ++i)
            if (rmax[i] > 0) dr[i] /= std::sqrt(rmax[i]);
        for (int j = 0; j < N; ++j)
            if (cmax[j] > 0) dc[j] /= std::sqrt(cmax[j]);
    }
}

struct IpmWork {
    // scaled problem
    SpMat A;
    Vec b, c, lo, hi;
    Vec dr, dc;
    double cost_scale = 1.0;
    // iterates
    Vec x, y, zl, zu;
    // KKT
    SpMat K;
    std::vector<std::ptrdiff_t> theta_slot;  // storage index of each Theta diagonal entry
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    bool analyzed = false;
    double delta_p = 1e-8, delta_d = 1e-8;
};

/// Assembles the lower triangle of the KKT matrix once; afterwards only the
/// Theta diagonal entries change value.
inline void build_kkt(IpmWork& W) {
    const int N = static_cast<int>(W.A.cols()), m = static_cast<int>(W.A.rows());
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(W.A.nonZeros() + N + m));
    for (int j = 0; j < N; ++j) trips.emplace_back(j, j, -1.0);  // Theta placeholder
    for (int col = 0; col < N; ++col)
        for (SpMat::InnerIterator v(W.A, col); v; ++v)
            trips.emplace_back(N + static_cast<int>(v.row()), col, v.value());
    for (int i = 0; i < m; ++i) trips.emplace_back(N + i, N + i, W.delta_d);
    W.K.resize(N + m, N + m);
    W.K.setFromTriplets(trips.begin(), trips.end());
    W.K.makeCompressed();
    // locate the Theta diagonal slots in compressed storage
    W.theta_slot.assign(static_cast<std::size_t>(N), -1);
    const auto* outer = W.K.outerIndexPtr();
    const auto* inner = W.K.innerIndexPtr();
    for (int j = 0; j < N; ++j)
        for (auto p = outer[j]; p < outer[j + 1]; ++p)
            if (inner[p] == j) {
                W.theta_slot[static_cast<std::size_t>(j)] = p;
                break;
            }
}

inline void set_theta(IpmWork& W, const Vec& theta) {
    auto* vals = W.K.valuePtr();
    for (int j = 0; j < theta.size(); ++j)
        vals[W.theta_slot[static_cast<std::size_t>(j)]] = -(theta[j] + W.delta_p);
}

/// Solves the augmented system with iterative refinement against the
/// unregularized KKT operator.
inline bool kkt_solve(IpmWork& W, const Vec& theta, const Vec& rd, const Vec& rp, Vec& dx,
                      Vec& dy, int refine_steps, int verbose = 0) {
    const int N = static_cast<int>(W.A.cols()), m = static_cast<int>(W.A.rows());
    Vec rhs(N + m);
    rhs.head(N) = rd;
    rhs.tail(m) = rp;
    Vec sol = W.ldlt.solve(rhs);
    if (W.ldlt.info() != Eigen::Success) return false;
    // refine against the unregularized operator; the rhs norm is no yardstick
    // here (barrier terms blow it up near convergence), so iterate while the
    // residual keeps shrinking
    double prev_res = kInf;
    for (int r = 0; r < refine_steps; ++r) {
        Vec res(N + m);
        res.head(N) = rd + theta.cwiseProduct(sol.head(N)) - W.A.transpose() * sol.tail(m);
        res.tail(m) = rp - W.A * sol.head(N);
        const double rn = res.lpNorm<Eigen::Infinity>();
        if (verbose >= 3)
            std::fprintf(stderr, "      refine %d: |res|=%.3e (head %.3e tail %.3e)\n", r, rn,
                         res.head(N).lpNorm<Eigen::Infinity>(),
                         m ? res.tail(m).lpNorm<Eigen::Infinity>() : 0.0);
        if (!(rn > 0) || rn >= 0.5 * prev_res) break;
        prev_res = rn;
        Vec corr = W.ldlt.solve(res);
        if (W.ldlt.info() != Eigen::Success) break;
        sol += corr;
    }
    dx = sol.head(N);
    dy = sol.tail(m);
    return dx.allFinite() && dy.allFinite();
}

}  // namespace ipm_detail

LpSolution solve(const LinearProgram& lp, const SolveOptions& opts = {});

namespace ipm_detail {

/// Elastic feasibility phase:  min sum(p) + sum(q)  s.t.  Ax + p - q = b
/// (p only, for <= rows), original bounds kept. Always feasible and bounded;
/// a positive optimum certifies infeasibility of the original problem.
inline LpSolution classify_by_elastic(const LinearProgram& lp, const SolveOptions& opts) {
    LinearProgram elastic;
    for (int j = 0; j < lp.num_vars(); ++j) {
        const auto& v = lp.variable(j);
        elastic.add_variable(v.name, v.lb, v.ub, 0.0);
    }
    std::vector<int> pvar(static_cast<std::size_t>(lp.num_rows()), -1);
    std::vector<int> qvar(static_cast<std::size_t>(lp.num_rows()), -1);
    for (int i = 0; i < lp.num_rows(); ++i) {
        const auto& r = lp.row(i);
        std::vector<LpTerm> terms(lp.terms().begin() + static_cast<std::ptrdiff_t>(r.begin),
                                  lp.terms().begin() + static_cast<std::ptrdiff_t>(r.end));
        const int p = elastic.add_variable("_p" + std::to_string(i), 0.0, kInf, 1.0);
        pvar[static_cast<std::size_t>(i)] = p;
        terms.push_back({p, -1.0});
        if (r.rel == Relation::Equal) {
            const int q = elastic.add_variable("_q" + std::to_string(i), 0.0, kInf, 1.0);
            qvar[static_cast<std::size_t>(i)] = q;
            terms.push_back({q, 1.0});
        }
        elastic.add_row(r.rel, r.rhs, terms, r.name);
    }
    SolveOptions eopts = opts;
    eopts.enable_elastic_phase = false;
    eopts.tol = std::min(opts.tol, 1e-8);
    LpSolution esol = solve(elastic, eopts);

    LpSolution out;
    if (esol.status != LpStatus::Optimal) {
        out.status = LpStatus::NumericalFailure;
        out.message = "elastic feasibility phase did not converge";
        return out;
    }
    double bnorm = 1.0;
    for (int i = 0; i < lp.num_rows(); ++i)
        bnorm = std::max(bnorm, std::abs(lp.row(i).rhs));
    if (esol.objective <= opts.feas_tol * bnorm * 10.0) {
        out.status = LpStatus::NumericalFailure;
        out.message =
            "problem appears feasible (elastic residual " + std::to_string(esol.objective) +
            ") but the interior point iteration stalled";
        return out;
    }
    out.status = LpStatus::Infeasible;
    for (int i = 0; i < lp.num_rows(); ++i) {
        double viol = 0;
        if (pvar[static_cast<std::size_t>(i)] >= 0)
            viol += esol.x[static_cast<std::size_t>(pvar[static_cast<std::size_t>(i)])];
        if (qvar[static_cast<std::size_t>(i)] >= 0)
            viol += esol.x[static_cast<std::size_t>(qvar[static_cast<std::size_t>(i)])];
        if (viol > opts.feas_tol * (1.0 + std::abs(lp.row(i).rhs)))
            out.certificate.push_back(
                {lp.row(i).name.empty() ? "row#" + std::to_string(i) : lp.row(i).name, viol});
    }
    std::sort(out.certificate.begin(), out.certificate.end(),
              [](const auto& a, const auto& b) { return a.amount > b.amount; });
    out.message = "infeasible: minimum total constraint violation " +
                  std::to_string(esol.objective);
    if (!out.certificate.empty())
        out.message += "; most violated row: " + out.certificate.front().row;
    return out;
}

}  // namespace ipm_detail

inline LpSolution solve(const LinearProgram& lp, const SolveOptions& opts) {
    using namespace ipm_detail;
    LpSolution sol;

    // reject inconsistent bounds up front (cheap, precise message)
    for (int j = 0; j < lp.num_vars(); ++j)
        if (lp.variable(j).lb > lp.variable(j).ub) {
            sol.status = LpStatus::Infeasible;
            sol.message = "variable '" + lp.variable(j).name + "' has crossing bounds";
            return sol;
        }

    InternalProblem P;
    std::string pmsg;
    const PresolveOutcome pre = build_internal(lp, P, pmsg);
    if (pre == PresolveOutcome::Infeasible) {
        sol.status = LpStatus::Infeasible;
        sol.message = pmsg;
        sol.certificate.push_back({pmsg, 0.0});
        return sol;
    }
    if (pre == PresolveOutcome::TriviallyOptimal) {
        sol.status = LpStatus::Optimal;
        sol.x.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
        for (int j = 0; j < lp.num_vars(); ++j)
            sol.x[static_cast<std::size_t>(j)] = P.fixed_val[static_cast<std::size_t>(j)];
        sol.y.assign(static_cast<std::size_t>(lp.num_rows()), 0.0);
        sol.z_lower.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
        sol.z_upper.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
        // all variables fixed: feasibility still needs checking row by row
        for (int i = 0; i < lp.num_rows(); ++i) {
            const auto& r = lp.row(i);
            const double act = lp.row_activity(i, sol.x);
            const double viol = r.rel == Relation::Equal ? std::abs(act - r.rhs)
                                                         : std::max(0.0, act - r.rhs);
            if (viol > opts.feas_tol * (1.0 + std::abs(r.rhs))) {
                sol.status = LpStatus::Infeasible;
                sol.message = "row '" + r.name + "' violated by fixed variables";
                sol.certificate.push_back({r.name, viol});
                return sol;
            }
        }
        sol.objective = lp.objective_value(sol.x);
        return sol;
    }

    const int N = static_cast<int>(P.A.cols());
    const int m = static_cast<int>(P.A.rows());

    IpmWork W;
    ruiz_scales(P.A, W.dr, W.dc);
    W.A = W.dr.asDiagonal() * P.A * W.dc.asDiagonal();
    W.A.makeCompressed();
    W.b = W.dr.cwiseProduct(P.b);
    W.c = W.dc.cwiseProduct(P.c);
    W.cost_scale = std::max(1.0, W.c.lpNorm<Eigen::Infinity>());
    W.c /= W.cost_scale;
    W.lo = Vec(N);
    W.hi = Vec(N);
    for (int j = 0; j < N; ++j) {
        W.lo[j] = P.lo[j] == -kInf ? -kInf : P.lo[j] / W.dc[j];
        W.hi[j] = P.hi[j] == kInf ? kInf : P.hi[j] / W.dc[j];
    }

    const double bnorm_orig = std::max(1.0, P.b.size() ? P.b.lpNorm<Eigen::Infinity>() : 0.0);
    const double cnorm_orig = std::max(1.0, P.c.lpNorm<Eigen::Infinity>());

    int n_bnd = 0;
    for (int j = 0; j < N; ++j) {
        if (W.lo[j] != -kInf) ++n_bnd;
        if (W.hi[j] != kInf) ++n_bnd;
    }

    if (n_bnd == 0) {
        // No bounds anywhere: the LP is an equality-constrained linear
        // objective; optimal iff both residual systems are consistent.
        // Classify via one least-squares style KKT solve with Theta = I.
        Vec theta = Vec::Ones(N);
        build_kkt(W);
        set_theta(W, theta);
        W.ldlt.analyzePattern(W.K);
        W.ldlt.factorize(W.K);
        Vec dx, dy;
        if (W.ldlt.info() == Eigen::Success &&
            kkt_solve(W, theta, W.c, W.b, dx, dy, opts.refine_steps)) {
            const double pres = m ? (W.A * dx - W.b).lpNorm<Eigen::Infinity>() : 0.0;
            const double dres = (W.c - W.A.transpose() * dy).lpNorm<Eigen::Infinity>();
            if (pres > 1e-7 * bnorm_orig) {
                sol.status = LpStatus::Infeasible;
                sol.message = "equality system inconsistent";
                return sol;
            }
            if (dres > 1e-7 * cnorm_orig) {
                sol.status = LpStatus::Unbounded;
                sol.message = "free-variable problem with cost outside the row space";
                return sol;
            }
            sol.status = LpStatus::Optimal;
            sol.x.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
            sol.y.assign(static_cast<std::size_t>(lp.num_rows()), 0.0);
            sol.z_lower.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
            sol.z_upper.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
            for (int j = 0; j < N; ++j)
                if (P.user_var[static_cast<std::size_t>(j)] >= 0)
                    sol.x[static_cast<std::size_t>(P.user_var[static_cast<std::size_t>(j)])] =
                        dx[j] * W.dc[j];
            for (int j = 0; j < lp.num_vars(); ++j)
                if (P.is_fixed[static_cast<std::size_t>(j)])
                    sol.x[static_cast<std::size_t>(j)] = P.fixed_val[static_cast<std::size_t>(j)];
            for (int i = 0; i < m; ++i)
                sol.y[static_cast<std::size_t>(P.row_user[static_cast<std::size_t>(i)])] =
                    dy[i] * W.dr[i] * W.cost_scale;
            sol.objective = lp.objective_value(sol.x);
            return sol;
        }
        sol.status = LpStatus::NumericalFailure;
        sol.message = "KKT factorization failed on free-variable problem";
        return sol;
    }

    build_kkt(W);
    W.ldlt.analyzePattern(W.K);

    // Mehrotra-style start: least-norm primal (min |x| s.t. Ax=b) and
    // least-squares dual (min |c - A'y|) from one Theta = I factorization,
    // then shifted into the interior of the bounds with margins matched to
    // the solution magnitudes. This keeps the first Newton directions on the
    // same scale as the iterates.
    {
        Vec theta0 = Vec::Ones(N);
        set_theta(W, theta0);
        W.ldlt.factorize(W.K);
        int bumps = 0;
        while (W.ldlt.info() != Eigen::Success && bumps < 6) {
            W.delta_p *= 100;
            W.delta_d *= 100;
            build_kkt(W);
            W.ldlt.analyzePattern(W.K);
            set_theta(W, theta0);
            W.ldlt.factorize(W.K);
            ++bumps;
        }
        if (W.ldlt.info() != Eigen::Success) {
            sol.status = LpStatus::NumericalFailure;
            sol.message = "initial KKT factorization failed";
            return sol;
        }
        Vec xhat(N), lam(m), resid_r(N), yhat(m);
        if (!kkt_solve(W, theta0, Vec::Zero(N), W.b, xhat, lam, opts.refine_steps) ||
            !kkt_solve(W, theta0, W.c, Vec::Zero(m), resid_r, yhat, opts.refine_steps)) {
            sol.status = LpStatus::NumericalFailure;
            sol.message = "starting-point solve failed";
            return sol;
        }
        // with Theta = I the first block gives -r + A'y = c, A r ~ 0, so the
        // dual least-squares residual c - A'yhat equals -resid_r
        Vec dual_resid = -resid_r;

        const double xs = std::max(1.0, 0.01 * xhat.lpNorm<Eigen::Infinity>());
        const double zs = std::max(1.0, 0.01 * dual_resid.lpNorm<Eigen::Infinity>());
        W.x = xhat;
        W.y = yhat;
        W.zl = Vec::Zero(N);
        W.zu = Vec::Zero(N);
        for (int j = 0; j < N; ++j) {
            const bool hasl = W.lo[j] != -kInf, hasu = W.hi[j] != kInf;
            if (hasl && hasu) {
                const double margin = std::min(0.49 * (W.hi[j] - W.lo[j]), xs);
                W.x[j] = std::clamp(xhat[j], W.lo[j] + margin, W.hi[j] - margin);
                W.zl[j] = std::max(dual_resid[j], 0.0) + zs;
                W.zu[j] = std::max(-dual_resid[j], 0.0) + zs;
            } else if (hasl) {
                W.x[j] = std::max(xhat[j], W.lo[j] + xs);
                W.zl[j] = std::max(dual_resid[j], zs);
            } else if (hasu) {
                W.x[j] = std::min(xhat[j], W.hi[j] - xs);
                W.zu[j] = std::max(-dual_resid[j], zs);
            }
        }
    }

    Vec g(N), w(N), theta(N), rp(m), rd(N), rhs_d(N);
    Vec dx_aff(N), dy_aff(m), dzl_aff(N), dzu_aff(N);
    Vec dx(N), dy(m), dzl(N), dzu(N);

    auto bound_gaps = [&](const Vec& x) {
        for (int j = 0; j < N; ++j) {
            g[j] = W.lo[j] != -kInf ? x[j] - W.lo[j] : 1.0;
            w[j] = W.hi[j] != kInf ? W.hi[j] - x[j] : 1.0;
        }
    };

    const double tau = 0.995;
    double mu = 0;
    bool converged = false;
    bool failed = false;
    std::string fail_msg;
    int iter = 0;
    double last_pres = kInf;

    // aim well below the requested tolerance, accept the best iterate seen
    // if progress stalls above the strict target but within contract
    const double tol_target = std::min(opts.tol, 1e-8);
    double best_score = kInf;
    Vec best_x, best_y, best_zl, best_zu;
    int last_improve = 0;

    // Certifies unboundedness: d is a recession direction if A d ~ 0, d is
    // compatible with every finite bound, and the cost strictly decreases
    // along it. Valid only from a (near-)feasible iterate.
    auto is_unbounded_ray = [&](const Vec& d) -> bool {
        if (!d.allFinite()) return false;
        const double dn = d.lpNorm<Eigen::Infinity>();
        if (!(dn > 0)) return false;
        Vec dd = d / dn;
        if (m > 0 && (W.A * dd).lpNorm<Eigen::Infinity>() > 1e-7) return false;
        for (int j = 0; j < N; ++j) {
            if (W.lo[j] != -kInf && dd[j] < -1e-8) return false;
            if (W.hi[j] != kInf && dd[j] > 1e-8) return false;
        }
        return W.c.dot(dd) < -1e-8;
    };

    for (; iter < opts.max_iters; ++iter) {
        bound_gaps(W.x);
        double gap_sum = 0;
        for (int j = 0; j < N; ++j) {
            if (W.lo[j] != -kInf) gap_sum += g[j] * W.zl[j];
            if (W.hi[j] != kInf) gap_sum += w[j] * W.zu[j];
        }
        mu = gap_sum / n_bnd;

        rp = W.b - W.A * W.x;
        rd = W.c - W.A.transpose() * W.y - W.zl + W.zu;

        // termination in the original problem's units
        double pobj = W.cost_scale * W.c.dot(W.x) + P.offset;
        double dobj = W.b.dot(W.y);
        for (int j = 0; j < N; ++j) {
            if (W.lo[j] != -kInf) dobj += W.lo[j] * W.zl[j];
            if (W.hi[j] != kInf) dobj -= W.hi[j] * W.zu[j];
        }
        dobj = W.cost_scale * dobj + P.offset;
        // residuals in original units, scaled the way verify_solution scales
        // them: rows relative to (1+|rhs|), stationarity relative to |c|
        double pres = 0;
        for (int i = 0; i < m; ++i)
            pres = std::max(pres, std::abs(rp[i]) / W.dr[i] / (1.0 + std::abs(P.b[i])));
        double dres = 0;
        for (int j = 0; j < N; ++j)
            dres = std::max(dres, std::abs(rd[j]) * W.cost_scale / W.dc[j]);
        dres /= cnorm_orig;
        const double gap_rel = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        const double score = std::max({pres, dres, gap_rel});
        if (score < 0.99 * best_score) {
            best_score = score;
            best_x = W.x;
            best_y = W.y;
            best_zl = W.zl;
            best_zu = W.zu;
            last_improve = iter;
        }

        if (opts.verbose)
            std::fprintf(stderr,
                         "ipm %3d: mu=%9.2e pres=%9.2e dres=%9.2e gap=%9.2e pobj=%+.9e\n",
                         iter, mu, pres, dres, gap_rel, pobj);
        if (score <= tol_target) {
            converged = true;
            break;
        }
        if (iter - last_improve > 10) {
            failed = true;
            fail_msg = "no further progress";
            break;
        }
        // divergence heuristics
        if (pres <= opts.feas_tol && pobj < -1e13 * cnorm_orig) {
            sol.status = LpStatus::Unbounded;
            sol.message = "objective diverges along a feasible direction";
            return sol;
        }
        if (W.x.lpNorm<Eigen::Infinity>() > 1e10 &&
            pres <= 1e-5 * bnorm_orig + last_pres && is_unbounded_ray(W.x)) {
            sol.status = LpStatus::Unbounded;
            sol.message = "recession direction with decreasing cost found";
            sol.iterations = iter;
            return sol;
        }
        if (W.x.lpNorm<Eigen::Infinity>() > 1e14) {
            failed = true;
            fail_msg = "iterates diverged";
            break;
        }
        last_pres = pres;

        for (int j = 0; j < N; ++j) {
            double t = 0;
            if (W.lo[j] != -kInf) t += W.zl[j] / g[j];
            if (W.hi[j] != kInf) t += W.zu[j] / w[j];
            theta[j] = t;
        }
        set_theta(W, theta);
        W.ldlt.factorize(W.K);
        int bumps = 0;
        while (W.ldlt.info() != Eigen::Success && bumps < 6) {
            W.delta_p *= 100;
            W.delta_d *= 100;
            build_kkt(W);
            W.ldlt.analyzePattern(W.K);
            set_theta(W, theta);
            W.ldlt.factorize(W.K);
            ++bumps;
        }
        if (W.ldlt.info() != Eigen::Success) {
            failed = true;
            fail_msg = "KKT factorization failed";
            break;
        }

        // affine predictor
        rhs_d = rd;
        for (int j = 0; j < N; ++j) {
            if (W.lo[j] != -kInf) rhs_d[j] += W.zl[j];
            if (W.hi[j] != kInf) rhs_d[j] -= W.zu[j];
        }
        if (!kkt_solve(W, theta, rhs_d, rp, dx_aff, dy_aff, opts.refine_steps, opts.verbose)) {
            failed = true;
            fail_msg = "KKT solve failed";
            break;
        }
        for (int j = 0; j < N; ++j) {
            dzl_aff[j] = W.lo[j] != -kInf ? -W.zl[j] - (W.zl[j] / g[j]) * dx_aff[j] : 0.0;
            dzu_aff[j] = W.hi[j] != kInf ? -W.zu[j] + (W.zu[j] / w[j]) * dx_aff[j] : 0.0;
        }
        auto max_step = [&](const Vec& x_, const Vec& dx_, const Vec& zl_, const Vec& dzl_,
                            const Vec& zu_, const Vec& dzu_, double& ap, double& ad) {
            ap = 1.0;
            ad = 1.0;
            for (int j = 0; j < N; ++j) {
                if (W.lo[j] != -kInf && dx_[j] < 0)
                    ap = std::min(ap, -(x_[j] - W.lo[j]) / dx_[j]);
                if (W.hi[j] != kInf && dx_[j] > 0)
                    ap = std::min(ap, (W.hi[j] - x_[j]) / dx_[j]);
                if (W.lo[j] != -kInf && dzl_[j] < 0) ad = std::min(ad, -zl_[j] / dzl_[j]);
                if (W.hi[j] != kInf && dzu_[j] < 0) ad = std::min(ad, -zu_[j] / dzu_[j]);
            }
        };
        double ap_aff, ad_aff;
        max_step(W.x, dx_aff, W.zl, dzl_aff, W.zu, dzu_aff, ap_aff, ad_aff);
        double mu_aff = 0;
        for (int j = 0; j < N; ++j) {
            if (W.lo[j] != -kInf)
                mu_aff += (g[j] + ap_aff * dx_aff[j]) * (W.zl[j] + ad_aff * dzl_aff[j]);
            if (W.hi[j] != kInf)
                mu_aff += (w[j] - ap_aff * dx_aff[j]) * (W.zu[j] + ad_aff * dzu_aff[j]);
        }
        mu_aff /= n_bnd;
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
        sigma = std::clamp(sigma, 1e-8, 1.0 - 1e-8);

        // corrector
        rhs_d = rd;
        for (int j = 0; j < N; ++j) {
            if (W.lo[j] != -kInf) {
                const double r_gz = sigma * mu - g[j] * W.zl[j] - dx_aff[j] * dzl_aff[j];
                rhs_d[j] -= r_gz / g[j];
            }
            if (W.hi[j] != kInf) {
                const double r_wv = sigma * mu - w[j] * W.zu[j] + dx_aff[j] * dzu_aff[j];
                rhs_d[j] += r_wv / w[j];
            }
        }
        if (!kkt_solve(W, theta, rhs_d, rp, dx, dy, opts.refine_steps, opts.verbose)) {
            failed = true;
            fail_msg = "KKT solve failed";
            break;
        }
        for (int j = 0; j < N; ++j) {
            if (W.lo[j] != -kInf) {
                const double r_gz = sigma * mu - g[j] * W.zl[j] - dx_aff[j] * dzl_aff[j];
                dzl[j] = (r_gz - W.zl[j] * dx[j]) / g[j];
            } else {
                dzl[j] = 0;
            }
            if (W.hi[j] != kInf) {
                const double r_wv = sigma * mu - w[j] * W.zu[j] + dx_aff[j] * dzu_aff[j];
                dzu[j] = (r_wv + W.zu[j] * dx[j]) / w[j];
            } else {
                dzu[j] = 0;
            }
        }
        double ap, ad;
        max_step(W.x, dx, W.zl, dzl, W.zu, dzu, ap, ad);
        ap = std::min(1.0, tau * ap);
        ad = std::min(1.0, tau * ad);
        if (opts.verbose >= 2) {
            const Vec kres_p = rp - W.A * dx;
            std::fprintf(stderr,
                         "      ap=%8.2e ad=%8.2e |dx|=%9.2e |dy|=%9.2e |Adx-rp|=%9.2e sigma=%.2e\n",
                         ap, ad, dx.lpNorm<Eigen::Infinity>(), dy.lpNorm<Eigen::Infinity>(),
                         kres_p.lpNorm<Eigen::Infinity>(), sigma);
        }
        if (ap < 1e-10 && ad < 1e-10) {
            failed = true;
            fail_msg = "step length collapsed";
            break;
        }
        W.x += ap * dx;
        W.y += ad * dy;
        W.zl += ad * dzl;
        W.zu += ad * dzu;
    }

    if (!converged && best_score <= opts.tol) {
        // strict target unreached, contract tolerance met by the best iterate
        converged = true;
        W.x = best_x;
        W.y = best_y;
        W.zl = best_zl;
        W.zu = best_zu;
    }
    if (!converged) {
        if (W.x.lpNorm<Eigen::Infinity>() > 1e8 && is_unbounded_ray(W.x)) {
            sol.status = LpStatus::Unbounded;
            sol.message = "recession direction with decreasing cost found";
            sol.iterations = iter;
            return sol;
        }
        if (opts.enable_elastic_phase) {
            LpSolution cls = classify_by_elastic(lp, opts);
            cls.iterations = iter;
            if (cls.status == LpStatus::NumericalFailure && !failed)
                cls.message += " (iteration limit reached)";
            return cls;
        }
        sol.status = LpStatus::NumericalFailure;
        sol.message = failed ? fail_msg : "iteration limit reached";
        sol.iterations = iter;
        return sol;
    }

    // map back
    sol.status = LpStatus::Optimal;
    sol.iterations = iter;
    sol.x.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
    sol.y.assign(static_cast<std::size_t>(lp.num_rows()), 0.0);
    sol.z_lower.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
    sol.z_upper.assign(static_cast<std::size_t>(lp.num_vars()), 0.0);
    for (int j = 0; j < N; ++j) {
        const int uj = P.user_var[static_cast<std::size_t>(j)];
        if (uj < 0) continue;
        double xv = W.x[j] * W.dc[j];
        xv = std::clamp(xv, lp.variable(uj).lb, lp.variable(uj).ub);
        sol.x[static_cast<std::size_t>(uj)] = xv;
        sol.z_lower[static_cast<std::size_t>(uj)] = W.zl[j] * W.cost_scale / W.dc[j];
        sol.z_upper[static_cast<std::size_t>(uj)] = W.zu[j] * W.cost_scale / W.dc[j];
    }
    for (int i = 0; i < m; ++i)
        sol.y[static_cast<std::size_t>(P.row_user[static_cast<std::size_t>(i)])] =
            W.y[i] * W.dr[i] * W.cost_scale;
    // fixed variables: value from presolve; their stationarity residual
    // belongs on the bound multipliers
    bool any_fixed = false;
    for (char f : P.is_fixed) any_fixed |= (f != 0);
    if (any_fixed) {
        std::vector<double> aty(static_cast<std::size_t>(lp.num_vars()), 0.0);
        for (int i = 0; i < lp.num_rows(); ++i) {
            const auto& r = lp.row(i);
            for (std::size_t k = r.begin; k < r.end; ++k)
                aty[static_cast<std::size_t>(lp.terms()[k].var)] +=
                    lp.terms()[k].coef * sol.y[static_cast<std::size_t>(i)];
        }
        for (int j = 0; j < lp.num_vars(); ++j)
            if (P.is_fixed[static_cast<std::size_t>(j)]) {
                sol.x[static_cast<std::size_t>(j)] = P.fixed_val[static_cast<std::size_t>(j)];
                const double red = lp.variable(j).cost - aty[static_cast<std::size_t>(j)];
                if (red >= 0)
                    sol.z_lower[static_cast<std::size_t>(j)] = red;
                else
                    sol.z_upper[static_cast<std::size_t>(j)] = -red;
            }
    }
    sol.objective = lp.objective_value(sol.x);
    return sol;
}

}  // namespace steamflex
