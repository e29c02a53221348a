#pragma once

// ADM for the l1 regression problem
//
//     min ||E||_1   s.t.  X = A Z + E,   A^T A = I.
//
// Because A has orthonormal columns the Z-update is a plain projection
// A^T(...), no normal-equation solve. Once the ADM guard is met each column
// is finished by an exact vertex descent (see vertex_descent), which also
// certifies optimality. The problem separates over the columns of X;
// solve_l1reg_columnwise exploits that with a pool of worker threads.

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "rpca/matcore.hpp"
#include "rpca/pcp_adm.hpp"

namespace rpca {

struct L1RegSolution {
    DenseMatrix z;  // coefficients, a.cols() x x.cols()
    DenseMatrix e;  // sparse residual, x.rows() x x.cols()
    int iterations = 0;
    int pivots = 0;  // vertex-phase edge moves, summed over columns
    double final_residual = 0.0;  // ||X - A Z - E||_inf / ||X||_inf
    bool converged = false;
    std::vector<Index> unconverged_columns;  // columnwise solver only
};

inline constexpr double kOrthonormalityTol = 1e-8;
inline constexpr double kStagnationDelta = 1e-12;
inline constexpr int kStagnationWindow = 20;
inline constexpr Index kMinVertexPivots = 200;

namespace detail {

inline void check_l1reg_inputs(const DenseMatrix& x, const DenseMatrix& a) {
    if (x.rows() != a.rows())
        throw DimensionError("l1reg: x has " + std::to_string(x.rows()) + " rows, dictionary has " +
                             std::to_string(a.rows()));
    require_finite(x, "l1reg x");
    require_finite(a, "l1reg dictionary");
    const double defect = orthonormality_defect(a);
    if (defect > kOrthonormalityTol)
        throw PreconditionError("l1reg: dictionary columns are not orthonormal (defect " +
                                std::to_string(defect) + ")");
}

struct KernelResult {
    int iterations = 0;
    int pivots = 0;
    double residual = 0.0;
    bool converged = false;
};

struct VertexResult {
    Eigen::VectorXd z;
    std::vector<Index> active;  // rows fitted exactly
    int pivots = 0;
    bool optimal = false;
};

// Exact finish for min ||x - A z||_1. Some optimum interpolates k = A.cols()
// rows, so start from the vertex through the k independent rows with the
// smallest residual at z0 and walk edges downhill. At a vertex with active
// rows I, leaving row j in direction +-B^{-1} e_j (B = A_I) changes the
// objective at rate 1 -+ c_j + zsum_j, c = B^{-T} A_N^T sign(r_N), where zsum
// collects rows of N that are already fitted. No downhill edge means optimal.
// Along an edge the objective is convex piecewise linear; stop at the
// breakpoint where the slope turns nonnegative and swap that row in.
inline VertexResult vertex_descent(const Eigen::VectorXd& x, const Eigen::MatrixXd& a,
                                   const Eigen::VectorXd& z0, int max_pivots) {
    const Index m = a.rows();
    const Index k = a.cols();
    VertexResult out;
    out.z = z0;
    const double zero_tol = 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());

    Eigen::VectorXd res = x - a * z0;
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index p, Index q) { return std::abs(res(p)) < std::abs(res(q)); });
    // Greedy independent rows via two-pass Gram-Schmidt.
    std::vector<Index>& act = out.active;
    Eigen::MatrixXd basis(k, k);
    for (Index i : order) {
        Eigen::VectorXd v = a.row(i).transpose();
        const auto n = static_cast<Index>(act.size());
        for (int pass = 0; pass < 2; ++pass)
            v -= basis.leftCols(n) * (basis.leftCols(n).transpose() * v);
        const double norm = v.norm();
        if (norm > 1e-6 * a.row(i).norm()) {
            basis.col(n) = v / norm;
            act.push_back(i);
            if (n + 1 == k) break;
        }
    }
    if (static_cast<Index>(act.size()) < k) return out;

    std::vector<char> in(static_cast<std::size_t>(m), 0);
    for (Index i : act) in[static_cast<std::size_t>(i)] = 1;
    Eigen::MatrixXd b(k, k);
    Eigen::VectorXd xb(k);
    Eigen::VectorXd g(k);
    Eigen::VectorXd zsum(k);
    Eigen::VectorXd w(m);
    std::vector<std::tuple<double, double, Index>> breaks;

    for (int pivot = 0;; ++pivot) {
        for (Index c = 0; c < k; ++c) {
            b.row(c) = a.row(act[static_cast<std::size_t>(c)]);
            xb(c) = x(act[static_cast<std::size_t>(c)]);
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
        if (!lu.isInvertible()) return out;
        const Eigen::VectorXd z = lu.solve(xb);
        res.noalias() = x - a * z;
        g.setZero();
        zsum.setZero();
        bool any_fitted = false;
        for (Index i = 0; i < m; ++i) {
            if (in[static_cast<std::size_t>(i)]) {
                res(i) = 0.0;
            } else if (std::abs(res(i)) <= zero_tol) {
                res(i) = 0.0;
                any_fitted = true;
            } else {
                g += (res(i) > 0 ? 1.0 : -1.0) * a.row(i).transpose();
            }
        }
        const Eigen::VectorXd c = lu.transpose().solve(g);
        if (any_fitted) {
            const Eigen::MatrixXd binv = lu.inverse();
            for (Index i = 0; i < m; ++i)
                if (!in[static_cast<std::size_t>(i)] && res(i) == 0.0)
                    zsum += (a.row(i) * binv).cwiseAbs().transpose();
        }

        Index leave = -1;
        double sign = 1.0;
        double slope = -1e-12;
        for (Index j = 0; j < k; ++j) {
            for (double sg : {1.0, -1.0}) {
                const double rate = 1.0 - sg * c(j) + zsum(j);
                if (rate < slope) {
                    slope = rate;
                    leave = j;
                    sign = sg;
                }
            }
        }
        out.pivots = pivot;
        if (leave < 0) {
            out.z = z;
            out.optimal = true;
            return out;
        }
        if (pivot >= max_pivots) return out;

        Eigen::VectorXd dir = Eigen::VectorXd::Zero(k);
        dir(leave) = sign;
        w.noalias() = a * lu.solve(dir);
        breaks.clear();
        for (Index i = 0; i < m; ++i)
            if (!in[static_cast<std::size_t>(i)] && res(i) * w(i) > 0)
                breaks.emplace_back(res(i) / w(i), 2.0 * std::abs(w(i)), i);
        std::sort(breaks.begin(), breaks.end());
        Index enter = -1;
        for (const auto& [t, weight, i] : breaks) {
            slope += weight;
            if (slope >= 0) {
                enter = i;
                break;
            }
        }
        if (enter < 0) return out;
        in[static_cast<std::size_t>(act[static_cast<std::size_t>(leave)])] = 0;
        act[static_cast<std::size_t>(leave)] = enter;
        in[static_cast<std::size_t>(enter)] = 1;
    }
}

// Algorithm body on a column-major block; z and e are outputs.
inline KernelResult l1reg_kernel(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a,
                                 const AdmConfig& cfg, Eigen::MatrixXd& z, Eigen::MatrixXd& e) {
    z.setZero(a.cols(), x.cols());
    e.setZero(x.rows(), x.cols());
    KernelResult out;
    const double x_inf = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    if (x_inf == 0.0) {
        out.converged = true;
        return out;
    }
    double beta = cfg.beta0.value_or(2.0 / x_inf);
    const double beta_max = cfg.beta_max.value_or(1e7 * beta);

    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    Eigen::MatrixXd az = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    Eigen::MatrixXd r(x.rows(), x.cols());
    Eigen::MatrixXd e_prev(x.rows(), x.cols());
    double residual = 1.0;
    double step = 1.0;
    int stalled = 0;
    // X - E can land in range(A) long before E is optimal (piecewise-constant
    // data does so on the first pass), so feasibility alone is not enough to stop.
    while (residual >= cfg.tol || step >= cfg.tol) {
        if (out.iterations >= cfg.max_iter) return out;
        const double inv_beta = 1.0 / beta;

        e_prev = e;
        r = x - az + inv_beta * y;
        e = r.unaryExpr([inv_beta](double v) { return soft_threshold(v, inv_beta); });
        step = (e - e_prev).cwiseAbs().maxCoeff() / x_inf;

        r = x - e + inv_beta * y;
        z.noalias() = a.transpose() * r;
        az.noalias() = a * z;

        r = x - az - e;
        y += beta * r;
        beta = std::min(cfg.rho * beta, beta_max);
        ++out.iterations;

        const double next = r.cwiseAbs().maxCoeff() / x_inf;
        if (!std::isfinite(next))
            throw NumericalError("l1reg: iterate diverged at iteration " +
                                 std::to_string(out.iterations));
        // The residual legitimately plateaus while Y accumulates under a
        // growing beta; only a flat residual at the penalty cap is a stall.
        const bool at_cap = beta >= beta_max;
        stalled = (at_cap && std::abs(next - residual) < kStagnationDelta) ? stalled + 1 : 0;
        residual = next;
        out.residual = residual;
        if (stalled >= kStagnationWindow && (residual >= cfg.tol || step >= cfg.tol)) return out;
    }

    // With beta saturated the iterate can freeze short of the optimum while
    // passing both tests above; finish each column exactly.
    const int max_pivots = static_cast<int>(std::max<Index>(kMinVertexPivots, 4 * x.rows()));
    for (Index j = 0; j < x.cols(); ++j) {
        if (x.col(j).cwiseAbs().maxCoeff() == 0.0) continue;
        VertexResult v = vertex_descent(x.col(j), a, z.col(j), max_pivots);
        out.pivots += v.pivots;
        if (!v.optimal) return out;
        z.col(j) = v.z;
        e.col(j).noalias() = x.col(j) - a * v.z;
        for (Index i : v.active) e(i, j) = 0.0;
    }
    out.residual = (x - a * z - e).cwiseAbs().maxCoeff() / x_inf;
    out.converged = true;
    return out;
}

inline double l1reg_residual(const DenseMatrix& x, const DenseMatrix& a, const DenseMatrix& z,
                             const DenseMatrix& e) {
    const double x_inf = linf_norm(x);
    if (x_inf == 0.0) return 0.0;
    return linf_norm(x - a * z - e) / x_inf;
}

}  // namespace detail

/// Whole-matrix solve: one penalty schedule, stopping on the global
/// ||X - AZ - E||_inf / ||X||_inf < tol guard.
inline L1RegSolution solve_l1reg(const DenseMatrix& x, const DenseMatrix& a,
                                 const AdmConfig& cfg = {}) {
    cfg.validate();
    detail::check_l1reg_inputs(x, a);
    Eigen::MatrixXd z, e;
    const auto k = detail::l1reg_kernel(x, a, cfg, z, e);
    L1RegSolution sol;
    sol.z = z;
    sol.e = e;
    sol.iterations = k.iterations;
    sol.final_residual = k.residual;
    sol.pivots = k.pivots;
    sol.converged = k.converged;
    return sol;
}

inline unsigned resolve_parallelism(unsigned parallelism) {
    if (parallelism != 0) return parallelism;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Solves each column of x as an independent problem. Columns are split into
/// contiguous ranges, one per worker; each column's arithmetic is independent
/// of the split, so the output does not depend on `parallelism` (0 = one
/// worker per hardware thread).
inline L1RegSolution solve_l1reg_columnwise(const DenseMatrix& x, const DenseMatrix& a,
                                            const AdmConfig& cfg = {},
                                            unsigned parallelism = 1) {
    cfg.validate();
    detail::check_l1reg_inputs(x, a);

    const Index n = x.cols();
    const Eigen::MatrixXd xc = x;
    const Eigen::MatrixXd ac = a;
    Eigen::MatrixXd z(a.cols(), n);
    Eigen::MatrixXd e(x.rows(), n);
    std::vector<detail::KernelResult> results(static_cast<std::size_t>(n));

    auto run_range = [&](Index begin, Index end) {
        Eigen::MatrixXd zj, ej;
        for (Index j = begin; j < end; ++j) {
            results[static_cast<std::size_t>(j)] = detail::l1reg_kernel(xc.col(j), ac, cfg, zj, ej);
            z.col(j) = zj;
            e.col(j) = ej;
        }
    };

    const auto workers = static_cast<Index>(std::min<unsigned>(
        resolve_parallelism(parallelism), static_cast<unsigned>(std::max<Index>(n, 1))));
    if (workers <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const Index chunk = (n + workers - 1) / workers;
        for (Index w = 0; w < workers; ++w) {
            const Index begin = w * chunk;
            const Index end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                try {
                    run_range(begin, end);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    L1RegSolution sol;
    sol.z = z;
    sol.e = e;
    sol.converged = true;
    for (Index j = 0; j < n; ++j) {
        const auto& r = results[static_cast<std::size_t>(j)];
        sol.iterations = std::max(sol.iterations, r.iterations);
        sol.pivots += r.pivots;
        if (!r.converged) {
            sol.converged = false;
            sol.unconverged_columns.push_back(j);
        }
    }
    sol.final_residual = detail::l1reg_residual(x, a, sol.z, sol.e);
    return sol;
}

}  // namespace rpca
