#pragma once

// Dense matrix type, norms, SVD access, and the two proximal operators
// (elementwise soft shrinkage and singular value thresholding).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#ifndef LAPACK_COMPLEX_CPP
#define LAPACK_COMPLEX_CPP
#endif
#include <lapacke.h>

#include "rpca/errors.hpp"

namespace rpca {

/// Row-major dense real matrix. Finiteness is enforced at library entry
/// points (readers, factories, solvers) through require_finite().
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

inline void require_finite(const DenseMatrix& m, const std::string& what) {
    if (!m.allFinite()) throw NumericalError(what + ": matrix contains NaN or Inf");
}

/// Checked construction from a row-major buffer.
inline DenseMatrix make_matrix(Index rows, Index cols, std::span<const double> data) {
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
        throw DimensionError("make_matrix: data length " + std::to_string(data.size()) +
                             " does not equal " + std::to_string(rows) + " x " +
                             std::to_string(cols));
    DenseMatrix m = Eigen::Map<const DenseMatrix>(data.data(), rows, cols);
    require_finite(m, "make_matrix");
    return m;
}

inline double frobenius_norm(const DenseMatrix& m) { return m.norm(); }

inline double l1_norm(const DenseMatrix& m) { return m.cwiseAbs().sum(); }

inline double linf_norm(const DenseMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Number of entries with |x| > threshold.
inline std::size_t l0_count(const DenseMatrix& m, double threshold) {
    if (threshold < 0) throw ConfigError("l0_count: threshold must be nonnegative");
    return static_cast<std::size_t>((m.array().abs() > threshold).count());
}

/// Sparse parts coming out of a solver carry tolerance-level noise; this is
/// the cutoff used when none is given.
inline double default_l0_threshold(const DenseMatrix& m) { return 1e-6 * linf_norm(m); }

inline std::size_t l0_count(const DenseMatrix& m) { return l0_count(m, default_l0_threshold(m)); }

inline double soft_threshold(double x, double eta) {
    if (x > eta) return x - eta;
    if (x < -eta) return x + eta;
    return 0.0;
}

/// Elementwise shrinkage sgn(x) max(|x| - eta, 0).
template <typename Derived>
DenseMatrix soft_threshold(const Eigen::MatrixBase<Derived>& m, double eta) {
    if (eta < 0) throw ConfigError("soft_threshold: eta must be nonnegative");
    return m.unaryExpr([eta](double x) { return soft_threshold(x, eta); });
}

/// Skinny SVD: only strictly positive singular values are kept.
struct SkinnySvd {
    DenseMatrix u;      // m x k, orthonormal columns
    Vector sigma;       // k, nonincreasing, positive
    DenseMatrix v;      // n x k, orthonormal columns

    Index rank() const { return sigma.size(); }
    Index rows() const { return u.rows(); }
    Index cols() const { return v.rows(); }

    DenseMatrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

inline constexpr double kDefaultRankTol = 1e-8;

namespace detail {

// Keeps the leading singular triplets whose value exceeds cutoff.
inline SkinnySvd truncate(const Eigen::MatrixXd& u, const Vector& s, const Eigen::MatrixXd& v,
                          double cutoff) {
    Index k = 0;
    while (k < s.size() && s(k) > cutoff && s(k) > 0.0) ++k;
    SkinnySvd out;
    out.u = u.leftCols(k);
    out.sigma = s.head(k);
    out.v = v.leftCols(k);
    return out;
}

// Thin SVD factors in column-major storage.
class DenseSvd {
 public:
    const Eigen::MatrixXd& matrixU() const { return u_; }
    const Vector& singularValues() const { return s_; }
    const Eigen::MatrixXd& matrixV() const { return v_; }

 private:
    friend DenseSvd dense_svd(const Eigen::MatrixXd& m);
    Eigen::MatrixXd u_;
    Vector s_;
    Eigen::MatrixXd v_;
};

// LAPACK divide and conquer (gesdd), with QR iteration (gesvd) as the
// fallback when gesdd reports non-convergence.
inline DenseSvd dense_svd(const Eigen::MatrixXd& m) {
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);
    DenseSvd out;
    out.s_.resize(k);
    out.u_.resize(rows, k);
    Eigen::MatrixXd vt(k, cols);
    const lapack_int ldu = std::max<lapack_int>(1, rows);
    const lapack_int ldvt = std::max<lapack_int>(1, k);
    if (k == 0) {
        out.v_.resize(cols, 0);
        return out;
    }
    Eigen::MatrixXd work = m;
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, work.data(), ldu,
                                     out.s_.data(), out.u_.data(), ldu, vt.data(), ldvt);
    if (info > 0) {
        work = m;
        Vector superb(std::max<lapack_int>(1, k - 1));
        info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, work.data(), ldu,
                              out.s_.data(), out.u_.data(), ldu, vt.data(), ldvt, superb.data());
    }
    if (info != 0)
        throw NumericalError("svd: factorization failed to converge (" +
                             std::to_string(m.rows()) + " x " + std::to_string(m.cols()) +
                             ", info " + std::to_string(info) + ")");
    out.v_ = vt.transpose();
    return out;
}
}  // namespace detail

/// Full dense SVD; singular values <= rank_tol * sigma_max are dropped.
inline SkinnySvd svd(const DenseMatrix& m, double rank_tol = kDefaultRankTol) {
    if (rank_tol < 0) throw ConfigError("svd: rank_tol must be nonnegative");
    require_finite(m, "svd");
    if (m.size() == 0) {
        SkinnySvd empty;
        empty.u.resize(m.rows(), 0);
        empty.v.resize(m.cols(), 0);
        return empty;
    }
    const auto f = detail::dense_svd(m);
    const Vector& s = f.singularValues();
    const double cutoff = s.size() > 0 ? rank_tol * s(0) : 0.0;
    return detail::truncate(f.matrixU(), s, f.matrixV(), cutoff);
}

/// Numerical rank under rank_tol relative to the largest singular value.
inline Index numerical_rank(const DenseMatrix& m, double rank_tol = kDefaultRankTol) {
    return svd(m, rank_tol).rank();
}

inline double nuclear_norm(const DenseMatrix& m) {
    return m.size() == 0 ? 0.0 : detail::dense_svd(m).singularValues().sum();
}

/// Singular value thresholding in factored form: U S_eta(Sigma) V^T with the
/// zeroed triplets removed.
inline SkinnySvd svt_factors(const DenseMatrix& w, double eta) {
    if (eta < 0) throw ConfigError("svt: eta must be nonnegative");
    require_finite(w, "svt");
    SkinnySvd out;
    if (w.size() == 0) {
        out.u.resize(w.rows(), 0);
        out.v.resize(w.cols(), 0);
        return out;
    }
    const auto f = detail::dense_svd(w);
    out = detail::truncate(f.matrixU(), f.singularValues(), f.matrixV(), eta);
    out.sigma.array() -= eta;
    return out;
}

/// Proximal operator of eta * nuclear norm: argmin_A eta ||A||_* + 0.5 ||A - W||_F^2.
inline DenseMatrix svt(const DenseMatrix& w, double eta) {
    const SkinnySvd f = svt_factors(w, eta);
    if (f.rank() == 0) return DenseMatrix::Zero(w.rows(), w.cols());
    return f.reconstruct();
}

/// Applies V Sigma^{-1} U^T (the pseudo-inverse of U Sigma V^T) to rhs.
inline DenseMatrix pseudo_inverse_apply(const SkinnySvd& f, const DenseMatrix& rhs) {
    if (rhs.rows() != f.u.rows())
        throw DimensionError("pseudo_inverse_apply: rhs has " + std::to_string(rhs.rows()) +
                             " rows, factorization expects " + std::to_string(f.u.rows()));
    const Eigen::MatrixXd projected = f.u.transpose() * rhs;
    return f.v * (f.sigma.cwiseInverse().asDiagonal() * projected);
}

/// Max absolute deviation of q^T q from the identity.
inline double orthonormality_defect(const DenseMatrix& q) {
    if (q.cols() == 0) return 0.0;
    const Eigen::MatrixXd g = q.transpose() * q;
    return (g - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

/// Extracts the submatrix at the given row and column indices.
inline DenseMatrix gather(const DenseMatrix& m, std::span<const Index> rows,
                          std::span<const Index> cols) {
    DenseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Index>(i), static_cast<Index>(j)) = m(rows[i], cols[j]);
    return out;
}

/// Writes block into m at the given row and column indices.
inline void scatter(DenseMatrix& m, std::span<const Index> rows, std::span<const Index> cols,
                    const DenseMatrix& block) {
    if (block.rows() != static_cast<Index>(rows.size()) ||
        block.cols() != static_cast<Index>(cols.size()))
        throw DimensionError("scatter: block shape does not match index sets");
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            m(rows[i], cols[j]) = block(static_cast<Index>(i), static_cast<Index>(j));
}

}  // namespace rpca
