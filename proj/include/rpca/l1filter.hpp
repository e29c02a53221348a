#pragma once

// l1 filtering: solve PCP on a small random seed block, recover the columns
// and rows that pass through the seed by l1 regression against the seed's
// singular subspaces, and complete the remaining block with the generalized
// Nystrom formula. Total cost is linear in m + n for a fixed target rank.
//
// Block layout (index sets, not contiguous ranges):
//
//              seed cols    other cols
//   seed rows  [  M^s          M^c   ]
//   other rows [  M^r          M~    ]
//
//   L^s = U Sigma V^T                  (small PCP)
//   L^c = U Q~                         (column filtering)
//   L^r = P~^T V^T                     (row filtering)
//   L~  = P~^T Sigma^{-1} Q~ = L^r (L^s)^+ L^c

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <vector>

#include "rpca/l1reg.hpp"
#include "rpca/matcore.hpp"
#include "rpca/pcp_adm.hpp"
#include "rpca/random.hpp"

namespace rpca {

using IndexSet = std::vector<Index>;

struct FilterConfig {
    double s_r = 10.0;  // row oversampling rate
    double s_c = 10.0;  // column oversampling rate
    std::optional<Index> rank_hint;
    double max_seed_fraction = 0.5;
    std::uint64_t rng_seed = 0;
    AdmConfig adm;         // l1 filters and the full-PCP fallback
    double seed_rho = 1.2;  // penalty growth for seed PCP; 1.5 freezes on ~5% of small seeds
    bool cross_validate = false;
    unsigned threads = 1;  // 0 = hardware concurrency
    double rank_tol = kDefaultRankTol;
    int max_rank_attempts = 16;

    void validate() const {
        if (!(s_r > 1) || !(s_c > 1)) throw ConfigError("l1filter: oversampling rates must be > 1");
        if (!(max_seed_fraction > 0) || max_seed_fraction > 1)
            throw ConfigError("l1filter: max_seed_fraction must lie in (0, 1]");
        if (rank_hint && *rank_hint < 1) throw ConfigError("l1filter: rank hint must be >= 1");
        if (rank_tol < 0) throw ConfigError("l1filter: rank_tol must be nonnegative");
        if (max_rank_attempts < 1) throw ConfigError("l1filter: max_rank_attempts must be >= 1");
        if (!(seed_rho > 1)) throw ConfigError("l1filter: seed_rho must be > 1");
        adm.validate();
    }
};

struct SampledBlock {
    IndexSet row_idx;  // sorted, distinct
    IndexSet col_idx;  // sorted, distinct
    DenseMatrix block;
};

struct SeedRecovery {
    IndexSet row_idx;
    IndexSet col_idx;
    SkinnySvd seed_svd;
    DenseMatrix seed_l;
    DenseMatrix seed_s;
    Index r_prime = 0;
    int pcp_iterations = 0;
    bool converged = false;
};

struct FilterResult {
    DenseMatrix q_tilde;  // r' x (n - |col_idx|)
    DenseMatrix p_tilde;  // r' x (m - |row_idx|)
    DenseMatrix s_col;    // |row_idx| x (n - |col_idx|)
    DenseMatrix s_row;    // (m - |row_idx|) x |col_idx|
    int iterations = 0;
    std::vector<Index> unconverged_columns;  // positions within the complement
    std::vector<Index> unconverged_rows;
};

/// Sorted complement of idx in [0, n).
inline IndexSet complement(const IndexSet& idx, Index n) {
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Index i : idx) {
        if (i < 0 || i >= n) throw DimensionError("complement: index out of range");
        if (taken[static_cast<std::size_t>(i)])
            throw DimensionError("complement: duplicate index " + std::to_string(i));
        taken[static_cast<std::size_t>(i)] = 1;
    }
    IndexSet out;
    out.reserve(static_cast<std::size_t>(n) - idx.size());
    for (Index i = 0; i < n; ++i)
        if (!taken[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
}

/// Uniformly samples n_rows rows and n_cols columns without replacement.
inline SampledBlock sample_submatrix(const DenseMatrix& m, Index n_rows, Index n_cols,
                                     std::uint64_t rng_seed) {
    if (n_rows < 0 || n_cols < 0 || n_rows > m.rows() || n_cols > m.cols())
        throw DimensionError("sample_submatrix: requested " + std::to_string(n_rows) + " x " +
                             std::to_string(n_cols) + " block from a " +
                             std::to_string(m.rows()) + " x " + std::to_string(m.cols()) +
                             " matrix");
    SampledBlock out;
    Rng row_rng(Rng::derive(rng_seed, 1));
    Rng col_rng(Rng::derive(rng_seed, 2));
    out.row_idx = row_rng.sample_without_replacement<Index>(m.rows(), n_rows);
    out.col_idx = col_rng.sample_without_replacement<Index>(m.cols(), n_cols);
    std::sort(out.row_idx.begin(), out.row_idx.end());
    std::sort(out.col_idx.begin(), out.col_idx.end());
    out.block = gather(m, out.row_idx, out.col_idx);
    return out;
}

/// Solves the seed PCP (lambda defaults to 1/sqrt(max(m', n'))) and takes the
/// skinny SVD of the recovered low-rank block. Throws SeedRankZero when the
/// block's numerical rank is zero.
inline SeedRecovery recover_seed(const SampledBlock& sample, const AdmConfig& adm = {},
                                 double rank_tol = kDefaultRankTol) {
    if (sample.block.size() == 0) throw DimensionError("recover_seed: seed block is empty");
    const PcpSolution pcp = solve_pcp(sample.block, adm);
    SeedRecovery seed;
    seed.row_idx = sample.row_idx;
    seed.col_idx = sample.col_idx;
    seed.seed_l = pcp.l;
    seed.seed_s = pcp.s;
    seed.pcp_iterations = pcp.iterations;
    seed.converged = pcp.converged;
    seed.seed_svd = svd(pcp.l, rank_tol);
    seed.r_prime = seed.seed_svd.rank();
    if (seed.r_prime == 0) throw SeedRankZero();
    return seed;
}

struct FilterBlock {
    DenseMatrix coeffs;
    DenseMatrix sparse;
    int iterations = 0;
    std::vector<Index> unconverged;
};

/// Column filtering: m_c = u_s Q~ + S^c.
inline FilterBlock filter_columns(const DenseMatrix& m_c, const DenseMatrix& u_s,
                                  const AdmConfig& cfg = {}, unsigned parallelism = 1) {
    FilterBlock out;
    if (m_c.cols() == 0) {
        detail::check_l1reg_inputs(m_c, u_s);
        out.coeffs.resize(u_s.cols(), 0);
        out.sparse.resize(m_c.rows(), 0);
        return out;
    }
    L1RegSolution sol = solve_l1reg_columnwise(m_c, u_s, cfg, parallelism);
    out.coeffs = std::move(sol.z);
    out.sparse = std::move(sol.e);
    out.iterations = sol.iterations;
    out.unconverged = std::move(sol.unconverged_columns);
    return out;
}

/// Row filtering: m_r = P~^T v_s^T + S^r, solved as the column problem on m_r^T.
inline FilterBlock filter_rows(const DenseMatrix& m_r, const DenseMatrix& v_s,
                               const AdmConfig& cfg = {}, unsigned parallelism = 1) {
    const DenseMatrix transposed = m_r.transpose();
    FilterBlock col = filter_columns(transposed, v_s, cfg, parallelism);
    col.sparse.transposeInPlace();
    return col;
}

/// Runs both filters (concurrently when parallelism > 1).
inline FilterResult filter_blocks(const DenseMatrix& m, const SeedRecovery& seed,
                                  const AdmConfig& cfg = {}, unsigned parallelism = 1) {
    const IndexSet other_rows = complement(seed.row_idx, m.rows());
    const IndexSet other_cols = complement(seed.col_idx, m.cols());
    const DenseMatrix m_c = gather(m, seed.row_idx, other_cols);
    const DenseMatrix m_r = gather(m, other_rows, seed.col_idx);

    FilterBlock cols, rows;
    const unsigned workers = resolve_parallelism(parallelism);
    if (workers > 1) {
        const unsigned half = std::max(1u, workers / 2);
        auto row_job = std::async(std::launch::async, [&] {
            return filter_rows(m_r, seed.seed_svd.v, cfg, workers - half);
        });
        cols = filter_columns(m_c, seed.seed_svd.u, cfg, half);
        rows = row_job.get();
    } else {
        cols = filter_columns(m_c, seed.seed_svd.u, cfg, 1);
        rows = filter_rows(m_r, seed.seed_svd.v, cfg, 1);
    }

    FilterResult fr;
    fr.q_tilde = std::move(cols.coeffs);
    fr.s_col = std::move(cols.sparse);
    fr.p_tilde = std::move(rows.coeffs);
    fr.s_row = std::move(rows.sparse);
    fr.iterations = std::max(cols.iterations, rows.iterations);
    for (Index j : cols.unconverged) fr.unconverged_columns.push_back(other_cols[static_cast<std::size_t>(j)]);
    for (Index i : rows.unconverged) fr.unconverged_rows.push_back(other_rows[static_cast<std::size_t>(i)]);
    return fr;
}

/// Completion of the unsampled block, P~^T Sigma^{-1} Q~.
inline DenseMatrix nystrom_complete(const SeedRecovery& seed, const FilterResult& fr) {
    const Index r = seed.seed_svd.rank();
    if (r < 1) throw SeedRankZero();
    if (fr.q_tilde.rows() != r || fr.p_tilde.rows() != r)
        throw DimensionError("nystrom_complete: coefficient rows do not match seed rank");
    const DenseMatrix scaled_q = seed.seed_svd.sigma.cwiseInverse().asDiagonal() * fr.q_tilde;
    return fr.p_tilde.transpose() * scaled_q;
}

/// Same completion by the explicit pseudo-inverse route, L^r (L^s)^+ L^c.
inline DenseMatrix nystrom_complete_pinv(const DenseMatrix& l_r, const SkinnySvd& seed_svd,
                                         const DenseMatrix& l_c) {
    if (l_r.cols() != seed_svd.cols() || l_c.rows() != seed_svd.rows())
        throw DimensionError("nystrom_complete_pinv: block shapes do not conform");
    return l_r * pseudo_inverse_apply(seed_svd, l_c);
}

/// Places every block of the low-rank estimate at its original indices.
inline DenseMatrix assemble(const SeedRecovery& seed, const FilterResult& fr,
                            const DenseMatrix& completion, Index m_rows, Index m_cols) {
    const IndexSet other_rows = complement(seed.row_idx, m_rows);
    const IndexSet other_cols = complement(seed.col_idx, m_cols);
    const auto n_other_rows = static_cast<Index>(other_rows.size());
    const auto n_other_cols = static_cast<Index>(other_cols.size());
    if (completion.rows() != n_other_rows || completion.cols() != n_other_cols ||
        fr.q_tilde.cols() != n_other_cols || fr.p_tilde.cols() != n_other_rows ||
        seed.seed_l.rows() != static_cast<Index>(seed.row_idx.size()) ||
        seed.seed_l.cols() != static_cast<Index>(seed.col_idx.size()))
        throw DimensionError("assemble: block shapes are inconsistent with the index sets");

    DenseMatrix l(m_rows, m_cols);
    scatter(l, seed.row_idx, seed.col_idx, seed.seed_l);
    scatter(l, seed.row_idx, other_cols, seed.seed_svd.u * fr.q_tilde);
    scatter(l, other_rows, seed.col_idx, fr.p_tilde.transpose() * seed.seed_svd.v.transpose());
    scatter(l, other_rows, other_cols, completion);
    return l;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

inline PcpSolution zero_rank_solution(const DenseMatrix& m) {
    PcpSolution sol;
    sol.l = DenseMatrix::Zero(m.rows(), m.cols());
    sol.s = m;
    sol.converged = true;
    sol.method = "seed-rank-zero";
    return sol;
}

}  // namespace detail

/// Full l1 filtering pipeline with target rank estimation. Starting from the
/// hint (or rank 1), a seed of size (s_r r) x (s_c r) is recovered and
/// accepted once m'/r' >= s_r and n'/r' >= s_c; otherwise the seed grows to
/// (s_r r') x (s_c r') on fresh indices. When the requested seed would exceed
/// max_seed_fraction of either dimension the whole matrix is solved by ADM
/// instead (method "full-pcp-fallback").
inline PcpSolution estimate_rank_and_solve(const DenseMatrix& m, const FilterConfig& cfg = {}) {
    cfg.validate();
    if (m.size() == 0) throw DimensionError("estimate_rank_and_solve: input matrix is empty");
    require_finite(m, "estimate_rank_and_solve");

    const auto start = std::chrono::steady_clock::now();
    const auto rows = static_cast<double>(m.rows());
    const auto cols = static_cast<double>(m.cols());

    auto fallback = [&](int attempts, double seed_time) {
        PcpSolution sol = solve_pcp(m, cfg.adm);
        sol.method = "full-pcp-fallback";
        sol.rank_attempts = attempts;
        sol.stages.seed_recovery = seed_time;
        sol.elapsed = detail::seconds_since(start);
        return sol;
    };

    AdmConfig seed_adm = cfg.adm;
    seed_adm.rho = cfg.seed_rho;
    auto recover = [&](Index n_rows, Index n_cols, std::uint64_t stream) {
        const SampledBlock sample =
            sample_submatrix(m, n_rows, n_cols, Rng::derive(cfg.rng_seed, stream));
        return recover_seed(sample, seed_adm, cfg.rank_tol);
    };

    Index rank = cfg.rank_hint.value_or(1);
    int total_pcp_iterations = 0;
    std::optional<SeedRecovery> accepted;
    int attempt = 0;
    for (; attempt < cfg.max_rank_attempts; ++attempt) {
        const double want_rows = std::ceil(cfg.s_r * static_cast<double>(rank));
        const double want_cols = std::ceil(cfg.s_c * static_cast<double>(rank));
        if (std::max(want_rows / rows, want_cols / cols) > cfg.max_seed_fraction)
            return fallback(attempt, detail::seconds_since(start));
        const auto seed_rows = static_cast<Index>(std::min(want_rows, rows));
        const auto seed_cols = static_cast<Index>(std::min(want_cols, cols));

        SeedRecovery seed;
        try {
            seed = recover(seed_rows, seed_cols, 2 * static_cast<std::uint64_t>(attempt));
        } catch (const SeedRankZero&) {
            PcpSolution sol = detail::zero_rank_solution(m);
            sol.rank_attempts = attempt + 1;
            sol.seed_rows = seed_rows;
            sol.seed_cols = seed_cols;
            sol.stages.seed_recovery = detail::seconds_since(start);
            sol.elapsed = sol.stages.seed_recovery;
            return sol;
        }
        total_pcp_iterations += seed.pcp_iterations;
        Index r_prime = seed.r_prime;

        if (cfg.cross_validate) {
            Index r_check = 0;
            try {
                const SeedRecovery check =
                    recover(seed_rows, seed_cols, 2 * static_cast<std::uint64_t>(attempt) + 1);
                total_pcp_iterations += check.pcp_iterations;
                r_check = check.r_prime;
            } catch (const SeedRankZero&) {
                r_check = 0;
            }
            if (r_check != r_prime) {
                rank = std::max(r_prime, r_check);
                continue;
            }
        }

        const bool enough_rows = static_cast<double>(seed_rows) / static_cast<double>(r_prime) >= cfg.s_r;
        const bool enough_cols = static_cast<double>(seed_cols) / static_cast<double>(r_prime) >= cfg.s_c;
        if (enough_rows && enough_cols) {
            accepted = std::move(seed);
            break;
        }
        rank = r_prime;
    }
    if (!accepted) return fallback(attempt, detail::seconds_since(start));

    const SeedRecovery& seed = *accepted;
    PcpSolution sol;
    sol.method = "l1filter";
    sol.iterations = total_pcp_iterations;
    sol.rank_attempts = attempt + 1;
    sol.seed_rows = static_cast<Index>(seed.row_idx.size());
    sol.seed_cols = static_cast<Index>(seed.col_idx.size());
    sol.stages.seed_recovery = detail::seconds_since(start);

    const auto filter_start = std::chrono::steady_clock::now();
    const FilterResult fr = filter_blocks(m, seed, cfg.adm, cfg.threads);
    sol.stages.filtering = detail::seconds_since(filter_start);

    const auto assembly_start = std::chrono::steady_clock::now();
    const DenseMatrix completion = nystrom_complete(seed, fr);
    sol.l = assemble(seed, fr, completion, m.rows(), m.cols());
    sol.s = m - sol.l;
    sol.stages.assembly = detail::seconds_since(assembly_start);

    // S = M - L elementwise, so M - L - S is identically zero.
    sol.final_residual = 0.0;
    sol.rank_of_l = seed.r_prime;
    sol.filter_iterations = fr.iterations;
    sol.unconverged_columns = fr.unconverged_columns;
    sol.unconverged_rows = fr.unconverged_rows;
    sol.converged = seed.converged && fr.unconverged_columns.empty() && fr.unconverged_rows.empty();
    sol.elapsed = detail::seconds_since(start);
    return sol;
}

}  // namespace rpca
