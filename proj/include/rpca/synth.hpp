#pragma once

// Synthetic low-rank + sparse problems with known ground truth, the
// checkerboard test image, and recovery metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include "rpca/matcore.hpp"
#include "rpca/random.hpp"

namespace rpca {

struct SynthSpec {
    Index m = 0;
    Index n = 0;
    double rho_r = 0.01;  // r / m
    double rho_s = 0.01;  // p / (m n)
    double magnitude = 500.0;
    double sigma_scale = 1.0;
    std::uint64_t rng_seed = 0;
    std::optional<Index> rank_override;  // fixes r regardless of rho_r

    Index rank() const {
        if (rank_override) return *rank_override;
        const auto r = static_cast<Index>(std::llround(rho_r * static_cast<double>(m)));
        return (r == 0 && rho_r > 0) ? 1 : r;
    }

    Index support_size() const {
        return static_cast<Index>(
            std::llround(rho_s * static_cast<double>(m) * static_cast<double>(n)));
    }

    void validate() const {
        if (m < 1 || n < 1) throw ConfigError("synth: dimensions must be >= 1");
        if (rho_r < 0 || rho_r >= 1) throw ConfigError("synth: rho_r must lie in [0, 1)");
        if (rho_s < 0 || rho_s >= 1) throw ConfigError("synth: rho_s must lie in [0, 1)");
        if (!(magnitude > 0)) throw ConfigError("synth: magnitude must be positive");
        if (sigma_scale < 0) throw ConfigError("synth: sigma_scale must be nonnegative");
        if (rank() < 0 || rank() > std::min(m, n))
            throw ConfigError("synth: rank must lie in [0, min(m, n)]");
        if (support_size() > m * n) throw ConfigError("synth: support larger than matrix");
    }
};

struct GroundTruth {
    DenseMatrix m_obs;
    DenseMatrix l0;
    DenseMatrix s0;
};

/// L0 = A B^T with i.i.d. N(0,1) factors; S0 has p entries i.i.d.
/// U[-magnitude, magnitude] on a uniformly random support; M = L0 + sigma S0.
inline GroundTruth generate(const SynthSpec& spec) {
    spec.validate();
    const Index r = spec.rank();
    const Index p = spec.support_size();

    Rng rng_a(Rng::derive(spec.rng_seed, 1));
    Rng rng_b(Rng::derive(spec.rng_seed, 2));
    Rng rng_support(Rng::derive(spec.rng_seed, 3));
    Rng rng_values(Rng::derive(spec.rng_seed, 4));

    Eigen::MatrixXd a(spec.m, r);
    Eigen::MatrixXd b(spec.n, r);
    for (Index i = 0; i < spec.m; ++i)
        for (Index k = 0; k < r; ++k) a(i, k) = rng_a.normal();
    for (Index j = 0; j < spec.n; ++j)
        for (Index k = 0; k < r; ++k) b(j, k) = rng_b.normal();

    GroundTruth gt;
    if (r > 0)
        gt.l0.noalias() = a * b.transpose();
    else
        gt.l0 = DenseMatrix::Zero(spec.m, spec.n);

    gt.s0 = DenseMatrix::Zero(spec.m, spec.n);
    const auto support = rng_support.sample_without_replacement<Index>(spec.m * spec.n, p);
    for (Index flat : support) {
        double v = 0.0;
        do {
            v = rng_values.uniform(-spec.magnitude, spec.magnitude);
        } while (v == 0.0);
        gt.s0(flat / spec.n, flat % spec.n) = v;
    }
    gt.m_obs = gt.l0 + spec.sigma_scale * gt.s0;
    return gt;
}

inline constexpr double kCheckerLow = 0.2;
inline constexpr double kCheckerHigh = 0.8;

/// m x m board of cell x cell squares alternating between two levels (rank 2).
inline DenseMatrix checkerboard(Index m, Index cell, double low = kCheckerLow,
                                double high = kCheckerHigh) {
    if (m < 1 || cell < 1 || m % cell != 0)
        throw ConfigError("checkerboard: cell must divide m");
    DenseMatrix img(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) img(i, j) = ((i / cell + j / cell) % 2 == 0) ? low : high;
    return img;
}

/// Replaces round(fraction * pixels) uniformly chosen pixels with 0 or peak
/// (fair coin). s0 holds the resulting deviation from the clean image.
inline GroundTruth corrupt_impulsive(const DenseMatrix& img, double fraction,
                                     std::uint64_t rng_seed, double peak = 1.0) {
    if (fraction < 0 || fraction > 1) throw ConfigError("corrupt_impulsive: fraction in [0, 1]");
    const Index total = img.size();
    const auto count =
        static_cast<Index>(std::llround(fraction * static_cast<double>(total)));
    Rng rng_support(Rng::derive(rng_seed, 5));
    Rng rng_values(Rng::derive(rng_seed, 6));

    GroundTruth gt;
    gt.l0 = img;
    gt.m_obs = img;
    for (Index flat : rng_support.sample_without_replacement<Index>(total, count)) {
        const double v = (rng_values.next() >> 63) ? peak : 0.0;
        gt.m_obs(flat / img.cols(), flat % img.cols()) = v;
    }
    gt.s0 = gt.m_obs - gt.l0;
    return gt;
}

/// ||L* - L0||_F / ||L0||_F
inline double rel_err(const DenseMatrix& l_star, const DenseMatrix& l0) {
    if (l_star.rows() != l0.rows() || l_star.cols() != l0.cols())
        throw DimensionError("rel_err: shapes differ");
    const double denom = frobenius_norm(l0);
    const double num = frobenius_norm(l_star - l0);
    return denom > 0 ? num / denom : num;
}

/// max |L* - L0|
inline double max_dif(const DenseMatrix& l_star, const DenseMatrix& l0) {
    if (l_star.rows() != l0.rows() || l_star.cols() != l0.cols())
        throw DimensionError("max_dif: shapes differ");
    return linf_norm(l_star - l0);
}

/// sum |L* - L0| / (m n)
inline double ave_dif(const DenseMatrix& l_star, const DenseMatrix& l0) {
    if (l_star.rows() != l0.rows() || l_star.cols() != l0.cols())
        throw DimensionError("ave_dif: shapes differ");
    if (l0.size() == 0) return 0.0;
    return l1_norm(l_star - l0) / static_cast<double>(l0.size());
}

/// 8-bit binary PGM (P5); values in [0, 1] map linearly to [0, 255], clamped
/// and rounded.
inline void write_pgm(const std::string& path, const DenseMatrix& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_pgm: cannot open " + path);
    out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
    for (Index i = 0; i < img.rows(); ++i) {
        for (Index j = 0; j < img.cols(); ++j) {
            const double v = std::clamp(img(i, j), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
    }
    if (!out) throw Error("write_pgm: write failed for " + path);
}

}  // namespace rpca
