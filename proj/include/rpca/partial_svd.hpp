#pragma once

// Leading singular triplets of a large dense matrix by Golub-Kahan-Lanczos
// bidiagonalization with full reorthogonalization. The start vector comes
// from a fixed-seed stream, so results are deterministic.
//
// Used by the PCP solver on inputs too large for a dense SVD per iteration.
// Single-vector Lanczos resolves one copy of a repeated singular value at a
// time; exactly repeated values are a measure-zero event for ADM iterates.

#include <algorithm>
#include <cstdint>

#include "rpca/matcore.hpp"
#include "rpca/random.hpp"

namespace rpca {

class LanczosBidiagonalization {
 public:
    explicit LanczosBidiagonalization(const DenseMatrix& a, std::uint64_t seed = 0x5EED)
        : a_(a), rng_(seed), max_steps_(std::min(a.rows(), a.cols())) {
        if (max_steps_ == 0) return;
        reserve(std::min<Index>(max_steps_, 32));
        Vector v0 = random_unit(a_.cols());
        v_.col(0) = v0;
        Vector u = a_ * v0;
        alpha_(0) = u.norm();
        if (alpha_(0) <= breakdown_tol()) {
            alpha_(0) = 0.0;
            u = orthogonal_restart(u_, 0, a_.rows());
        } else {
            u /= alpha_(0);
        }
        u_.col(0) = u;
        steps_ = 1;
        advance_right();
    }

    Index steps() const { return steps_; }
    Index max_steps() const { return max_steps_; }

    /// Top-k singular triplets, extending the Krylov space until every
    /// requested Ritz triplet has residual <= tol * sigma_max.
    SkinnySvd top(Index k, double tol = 1e-12) {
        k = std::min(k, max_steps_);
        SkinnySvd out;
        out.u.resize(a_.rows(), 0);
        out.v.resize(a_.cols(), 0);
        if (k <= 0) return out;
        Index target = std::min(max_steps_, std::max(steps_, std::max<Index>(2 * k, k + 10)));
        for (;;) {
            extend_to(target);
            if (ritz(k, tol, out) || steps_ == max_steps_) {
                if (steps_ == max_steps_) ritz(k, tol, out);
                return out;
            }
            target = std::min(max_steps_, steps_ + std::max<Index>(k, 10));
        }
    }

 private:
    double breakdown_tol() const { return 1e-14 * std::max(1.0, scale_); }

    void reserve(Index cap) {
        if (cap <= capacity_) return;
        u_.conservativeResize(a_.rows(), cap);
        v_.conservativeResize(a_.cols(), cap + 1);
        alpha_.conservativeResize(cap);
        beta_.conservativeResize(cap);
        capacity_ = cap;
    }

    Vector random_unit(Index n) {
        Vector x(n);
        for (Index i = 0; i < n; ++i) x(i) = rng_.normal();
        return x / x.norm();
    }

    // Twice-iterated classical Gram-Schmidt against the first `count` columns.
    static void orthogonalize(Vector& x, const Eigen::MatrixXd& basis, Index count) {
        if (count == 0) return;
        for (int pass = 0; pass < 2; ++pass) {
            const Vector c = basis.leftCols(count).transpose() * x;
            x.noalias() -= basis.leftCols(count) * c;
        }
    }

    Vector orthogonal_restart(const Eigen::MatrixXd& basis, Index count, Index n) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Vector x = random_unit(n);
            orthogonalize(x, basis, count);
            const double nx = x.norm();
            if (nx > 1e-8) return x / nx;
        }
        throw NumericalError("lanczos: unable to restart with an orthogonal vector");
    }

    // Computes beta_{steps-1} and v_{steps} from the latest left vector.
    void advance_right() {
        const Index j = steps_ - 1;
        Vector r = a_.transpose() * u_.col(j);
        r.noalias() -= alpha_(j) * v_.col(j);
        orthogonalize(r, v_, j + 1);
        beta_(j) = r.norm();
        scale_ = std::max({scale_, alpha_(j), beta_(j)});
        if (j + 1 >= a_.cols()) {
            beta_(j) = 0.0;
            return;
        }
        if (beta_(j) <= breakdown_tol()) {
            beta_(j) = 0.0;
            v_.col(j + 1) = orthogonal_restart(v_, j + 1, a_.cols());
        } else {
            v_.col(j + 1) = r / beta_(j);
        }
    }

    void extend_to(Index target) {
        target = std::min(target, max_steps_);
        if (target > capacity_) reserve(std::min(max_steps_, std::max(target, 2 * capacity_)));
        while (steps_ < target) {
            const Index j = steps_;
            Vector p = a_ * v_.col(j);
            p.noalias() -= beta_(j - 1) * u_.col(j - 1);
            orthogonalize(p, u_, j);
            alpha_(j) = p.norm();
            if (alpha_(j) <= breakdown_tol()) {
                alpha_(j) = 0.0;
                u_.col(j) = orthogonal_restart(u_, j, a_.rows());
            } else {
                u_.col(j) = p / alpha_(j);
            }
            ++steps_;
            advance_right();
        }
    }

    bool ritz(Index k, double tol, SkinnySvd& out) const {
        const Index s = steps_;
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(s, s);
        for (Index j = 0; j < s; ++j) {
            b(j, j) = alpha_(j);
            if (j + 1 < s) b(j, j + 1) = beta_(j);
        }
        const auto f = detail::dense_svd(b);
        const Vector& sig = f.singularValues();
        const double residual_beta = beta_(s - 1);
        const double smax = sig.size() > 0 ? sig(0) : 0.0;
        bool converged = true;
        for (Index i = 0; i < k; ++i)
            if (residual_beta * std::abs(f.matrixU()(s - 1, i)) > tol * smax) converged = false;
        out.sigma = sig.head(k);
        out.u = u_.leftCols(s) * f.matrixU().leftCols(k);
        out.v = v_.leftCols(s) * f.matrixV().leftCols(k);
        return converged;
    }

    const DenseMatrix& a_;
    Rng rng_;
    Index max_steps_ = 0;
    Index steps_ = 0;
    Index capacity_ = 0;
    double scale_ = 0.0;
    Eigen::MatrixXd u_;
    Eigen::MatrixXd v_;
    Vector alpha_;
    Vector beta_;
};

/// Convenience wrapper: leading k singular triplets of a.
inline SkinnySvd partial_svd(const DenseMatrix& a, Index k, double tol = 1e-12) {
    require_finite(a, "partial_svd");
    LanczosBidiagonalization lanczos(a);
    return lanczos.top(k, tol);
}

}  // namespace rpca
