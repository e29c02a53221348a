#pragma once

// Reference computations used only by the tests. Each one takes a different
// route from the library code it checks.

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "rpca/matcore.hpp"
#include "rpca/random.hpp"

namespace oracle {

using rpca::DenseMatrix;
using rpca::Index;

inline DenseMatrix gaussian(Index rows, Index cols, rpca::Rng& rng) {
    DenseMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline DenseMatrix low_rank(Index rows, Index cols, Index rank, rpca::Rng& rng) {
    const DenseMatrix a = gaussian(rows, rank, rng);
    return a * gaussian(rank, cols, rng);
}

/// Orthonormal basis of a random rows x k Gaussian matrix (Householder QR).
inline DenseMatrix orthonormal(Index rows, Index k, rpca::Rng& rng) {
    const Eigen::MatrixXd g = gaussian(rows, k, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, k);
    return q;
}

/// Nuclear norm from the eigenvalues of the Gram matrix.
inline double nuclear_norm(const DenseMatrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues().sum();
}

/// eta ||A||_* + 0.5 ||A - W||_F^2
inline double svt_objective(const DenseMatrix& a, const DenseMatrix& w, double eta) {
    return eta * nuclear_norm(a) + 0.5 * (a - w).squaredNorm();
}

inline DenseMatrix pinv(const DenseMatrix& a) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    cod.setThreshold(1e-10);
    return cod.pseudoInverse();
}

/// min_z ||x - A z||_1 over z in R^2 by three stages of grid refinement. With
/// A^T A = I any minimizer has ||z||_2 <= 2 ||x||_1, which bounds the first grid.
struct GridResult {
    double objective = 0.0;
    Eigen::Vector2d z = Eigen::Vector2d::Zero();
};

inline GridResult grid_l1_min(const Eigen::VectorXd& x, const Eigen::MatrixXd& a) {
    auto objective = [&](const Eigen::Vector2d& z) { return (x - a * z).lpNorm<1>(); };
    GridResult best{objective(Eigen::Vector2d::Zero()), Eigen::Vector2d::Zero()};

    auto scan = [&](Eigen::Vector2d center, double half_width, double step) {
        const auto steps = static_cast<int>(std::ceil(2.0 * half_width / step));
        const Eigen::Vector2d origin = center.array() - half_width;
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; j <= steps; ++j) {
                const Eigen::Vector2d z = origin + step * Eigen::Vector2d(i, j);
                const double f = objective(z);
                if (f < best.objective) best = {f, z};
            }
        }
    };

    const double radius = 2.0 * x.lpNorm<1>();
    if (radius == 0.0) return best;
    const double h1 = radius / 100.0;
    scan(Eigen::Vector2d::Zero(), radius, h1);
    const double h2 = 4.0 * h1 / 200.0;
    scan(best.z, 2.0 * h1, h2);
    scan(best.z, 2.0 * h2, 1e-4);
    return best;
}

}  // namespace oracle
