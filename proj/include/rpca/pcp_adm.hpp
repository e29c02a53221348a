#pragma once

// Inexact augmented Lagrangian (ADM) solver for Principal Component Pursuit:
//
//     min ||L||_* + lambda ||S||_1   s.t.  M = L + S
//
// Each iteration updates S by soft shrinkage, then L by singular value
// thresholding, then the multiplier Y and penalty beta. The S-then-L order is
// fixed so results are reproducible for a given SVD backend.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rpca/matcore.hpp"
#include "rpca/partial_svd.hpp"
#include "rpca/random.hpp"

namespace rpca {

enum class SvdBackend {
    automatic,  // dense below AdmConfig::partial_svd_min_dim, Lanczos above
    dense,
    lanczos,
};

/// Hyperparameters shared by the PCP and l1-regression ADM solvers. Fields
/// left empty resolve to solver-specific defaults.
struct AdmConfig {
    std::optional<double> lambda;    // PCP weight; default 1/sqrt(max(m, n))
    double tol = 1e-7;               // stopping tolerance
    std::optional<double> beta0;     // initial penalty
    double rho = 1.5;                // penalty growth factor, > 1
    std::optional<double> beta_max;  // penalty cap; default 1e7 * beta0
    int max_iter = 1000;

    SvdBackend svd_backend = SvdBackend::automatic;
    Index partial_svd_min_dim = 800;
    bool record_trace = false;

    void validate() const {
        if (lambda && !(*lambda > 0)) throw ConfigError("adm: lambda must be positive");
        if (!(tol > 0)) throw ConfigError("adm: tol must be positive");
        if (beta0 && !(*beta0 > 0)) throw ConfigError("adm: beta0 must be positive");
        if (!(rho > 1)) throw ConfigError("adm: rho must be > 1");
        if (beta_max && !(*beta_max > 0)) throw ConfigError("adm: beta_max must be positive");
        if (beta0 && beta_max && !(*beta0 < *beta_max))
            throw ConfigError("adm: beta0 must be smaller than beta_max");
        if (max_iter < 1) throw ConfigError("adm: max_iter must be >= 1");
    }
};

struct StageTimes {
    double seed_recovery = 0.0;
    double filtering = 0.0;
    double assembly = 0.0;
};

struct PcpSolution {
    DenseMatrix l;
    DenseMatrix s;
    int iterations = 0;
    double final_residual = 0.0;  // ||M - L - S||_F / ||M||_F
    Index rank_of_l = 0;
    double elapsed = 0.0;         // seconds
    bool converged = false;
    std::string method = "adm";

    // Filled in by the l1 filtering pipeline.
    StageTimes stages;
    Index seed_rows = 0;
    Index seed_cols = 0;
    int rank_attempts = 0;
    int filter_iterations = 0;
    std::vector<Index> unconverged_columns;
    std::vector<Index> unconverged_rows;

    // Per-iteration penalty and relative residual, when requested.
    std::vector<double> beta_trace;
    std::vector<double> residual_trace;
};

inline double default_lambda(Index rows, Index cols) {
    if (rows < 1 || cols < 1) throw DimensionError("default_lambda: dimensions must be >= 1");
    return 1.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));
}

/// Power-iteration estimate of the spectral norm ||M||_2.
inline double spectral_norm_estimate(const DenseMatrix& m, int max_iter = 100,
                                     double rel_tol = 1e-6) {
    if (m.size() == 0) return 0.0;
    Rng rng(0xA11CE);
    Vector v(m.cols());
    for (Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Vector mv = m * v;
        const double nmv = mv.norm();
        if (nmv == 0.0) return estimate;
        Vector w = m.transpose() * mv;
        const double nw = w.norm();
        const double next = std::sqrt(nw);
        v = w / nw;
        if (std::abs(next - estimate) <= rel_tol * next) return next;
        estimate = next;
    }
    return estimate;
}

namespace detail {

// Singular value thresholding with either backend. The Lanczos path keeps a
// predicted count of singular values above threshold between calls and
// enlarges the request until at least one computed value falls below it, so
// the result is the exact SVT (not a truncation).
class SvtEngine {
 public:
    SvtEngine(SvdBackend backend, Index rows, Index cols, Index partial_min_dim)
        : full_(std::min(rows, cols)) {
        use_lanczos_ = backend == SvdBackend::lanczos ||
                       (backend == SvdBackend::automatic && full_ >= partial_min_dim);
        predicted_ = std::min<Index>(10, full_);
    }

    SkinnySvd apply(const DenseMatrix& w, double eta) {
        if (!use_lanczos_ || full_ == 0) return svt_factors(w, eta);
        LanczosBidiagonalization lanczos(w);
        for (;;) {
            if (4 * predicted_ > full_) return dense_fallback(w, eta);
            SkinnySvd top = lanczos.top(predicted_);
            Index above = 0;
            while (above < top.sigma.size() && top.sigma(above) > eta) ++above;
            if (above < predicted_ || predicted_ == full_) {
                predicted_ = std::min(above + 1, full_);
                SkinnySvd out;
                out.u = top.u.leftCols(above);
                out.v = top.v.leftCols(above);
                out.sigma = top.sigma.head(above).array() - eta;
                return out;
            }
            predicted_ = std::min(full_, above + std::max<Index>(1, std::lround(0.05 * full_)));
        }
    }

 private:
    SkinnySvd dense_fallback(const DenseMatrix& w, double eta) {
        SkinnySvd out = svt_factors(w, eta);
        predicted_ = std::min(out.rank() + 1, full_);
        return out;
    }

    Index full_;
    Index predicted_;
    bool use_lanczos_ = false;
};

}  // namespace detail

/// Solves PCP on m. Non-convergence is reported through `converged` and
/// final_residual > tol; a NaN iterate throws NumericalError.
inline PcpSolution solve_pcp(const DenseMatrix& m, const AdmConfig& cfg = {}) {
    cfg.validate();
    if (m.size() == 0) throw DimensionError("solve_pcp: input matrix is empty");
    require_finite(m, "solve_pcp");

    const auto start = std::chrono::steady_clock::now();
    const Index rows = m.rows();
    const Index cols = m.cols();
    const double lambda = cfg.lambda.value_or(default_lambda(rows, cols));
    const double norm_m = frobenius_norm(m);

    double beta = 1.0;
    if (cfg.beta0) {
        beta = *cfg.beta0;
    } else {
        const double spectral = spectral_norm_estimate(m);
        if (spectral > 0) beta = 1.25 / spectral;
    }
    const double beta_max = cfg.beta_max.value_or(1e7 * beta);
    if (!(beta < beta_max)) throw ConfigError("solve_pcp: beta0 must be smaller than beta_max");

    PcpSolution sol;
    sol.l = DenseMatrix::Zero(rows, cols);
    sol.s = DenseMatrix::Zero(rows, cols);
    DenseMatrix y = DenseMatrix::Zero(rows, cols);
    DenseMatrix work(rows, cols);
    detail::SvtEngine svt_engine(cfg.svd_backend, rows, cols, cfg.partial_svd_min_dim);

    for (int k = 1; k <= cfg.max_iter; ++k) {
        const double inv_beta = 1.0 / beta;

        work = m - sol.l + inv_beta * y;
        sol.s = soft_threshold(work, lambda * inv_beta);

        work = m - sol.s + inv_beta * y;
        const SkinnySvd factors = svt_engine.apply(work, inv_beta);
        if (factors.rank() > 0)
            sol.l.noalias() = factors.u * factors.sigma.asDiagonal() * factors.v.transpose();
        else
            sol.l.setZero();
        sol.rank_of_l = factors.rank();

        work = m - sol.l - sol.s;
        y += beta * work;
        const double residual = norm_m > 0 ? frobenius_norm(work) / norm_m : 0.0;
        if (!std::isfinite(residual))
            throw NumericalError("solve_pcp: iterate diverged at iteration " + std::to_string(k));

        if (cfg.record_trace) {
            sol.beta_trace.push_back(beta);
            sol.residual_trace.push_back(residual);
        }
        beta = std::min(cfg.rho * beta, beta_max);

        sol.iterations = k;
        sol.final_residual = residual;
        if (residual <= cfg.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

}  // namespace rpca
