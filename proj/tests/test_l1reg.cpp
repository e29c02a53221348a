#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rpca/l1reg.hpp"

using namespace rpca;

namespace {

DenseMatrix spiked(Index rows, Index cols, double fraction, double magnitude, Rng& rng) {
    DenseMatrix e = DenseMatrix::Zero(rows, cols);
    const auto count = static_cast<Index>(std::llround(fraction * static_cast<double>(rows * cols)));
    for (Index flat : rng.sample_without_replacement<Index>(rows * cols, count))
        e(flat / cols, flat % cols) = rng.uniform(0.0, 1.0) < 0.5 ? -magnitude : magnitude;
    return e;
}

}  // namespace

TEST(L1Reg, NoiselessDataIsFitExactly) {
    Rng rng(1);
    const DenseMatrix a = oracle::orthonormal(50, 4, rng);
    const DenseMatrix z0 = oracle::gaussian(4, 6, rng);
    const L1RegSolution sol = solve_l1reg(a * z0, a);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(linf_norm(sol.z - z0), 1e-6);
    EXPECT_LE(linf_norm(sol.e), 1e-6);
}

TEST(L1Reg, RecoversSpikes) {
    Rng rng(2);
    const DenseMatrix a = oracle::orthonormal(200, 5, rng);
    const DenseMatrix z0 = oracle::gaussian(5, 8, rng);
    const DenseMatrix e0 = spiked(200, 8, 0.05, 100.0, rng);
    const DenseMatrix x = a * z0 + e0;
    const L1RegSolution sol = solve_l1reg(x, a);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(linf_norm(sol.e - e0), 1e-4);
    EXPECT_LE(linf_norm(x - a * sol.z - sol.e), 1e-7 * linf_norm(x));
    EXPECT_LE(sol.final_residual, 1e-7);
}

TEST(L1Reg, OneDimensionalByHand) {
    DenseMatrix a = DenseMatrix::Zero(4, 1);
    a(0, 0) = 1.0;
    DenseMatrix x = DenseMatrix::Zero(4, 1);
    x(0, 0) = 10.0;
    x(1, 0) = 3.0;
    const L1RegSolution sol = solve_l1reg(x, a);
    ASSERT_TRUE(sol.converged);
    EXPECT_NEAR(sol.z(0, 0), 10.0, 1e-6);
    EXPECT_NEAR(sol.e(0, 0), 0.0, 1e-6);
    EXPECT_NEAR(sol.e(1, 0), 3.0, 1e-6);
    EXPECT_NEAR(sol.e(2, 0), 0.0, 1e-12);
}

TEST(L1Reg, MatchesGridOracleOnSmallProblems) {
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        const DenseMatrix a = oracle::orthonormal(10, 2, rng);
        DenseMatrix x = oracle::gaussian(10, 1, rng);
        if (t % 2 == 0) x = a * oracle::gaussian(2, 1, rng) + spiked(10, 1, 0.2, 5.0, rng);
        const L1RegSolution sol = solve_l1reg(x, a);
        ASSERT_TRUE(sol.converged);
        const double ours = l1_norm(x - a * sol.z);
        const auto best = oracle::grid_l1_min(x.col(0), a);
        EXPECT_LE(ours, best.objective + 1e-3) << "instance " << t;
    }
}

TEST(L1Reg, PiecewiseConstantDataReachesTheOptimum) {
    // Two row groups; one outlier per group. X - E sits in range(A) right away,
    // so stopping on feasibility alone would keep a wrong fit.
    DenseMatrix a = DenseMatrix::Zero(12, 2);
    DenseMatrix x(12, 1);
    for (Index i = 0; i < 12; ++i) {
        const bool first = i < 8;
        a(i, first ? 0 : 1) = 1.0 / std::sqrt(first ? 8.0 : 4.0);
        x(i, 0) = first ? 0.2 : 0.8;
    }
    x(0, 0) = 1.0;
    x(9, 0) = 0.0;
    const L1RegSolution sol = solve_l1reg(x, a);
    ASSERT_TRUE(sol.converged);
    const DenseMatrix fit = a * sol.z;
    for (Index i = 0; i < 12; ++i) EXPECT_NEAR(fit(i, 0), i < 8 ? 0.2 : 0.8, 1e-6);
}

TEST(L1Reg, ColumnwiseEqualsWholeMatrix) {
    Rng rng(4);
    const DenseMatrix a = oracle::orthonormal(60, 3, rng);
    const DenseMatrix x = a * oracle::gaussian(3, 25, rng) + spiked(60, 25, 0.1, 50.0, rng);
    const L1RegSolution whole = solve_l1reg(x, a);
    const L1RegSolution cols = solve_l1reg_columnwise(x, a);
    ASSERT_TRUE(whole.converged);
    ASSERT_TRUE(cols.converged);
    EXPECT_LE(linf_norm(whole.z - cols.z), 1e-8);
    EXPECT_LE(linf_norm(whole.e - cols.e), 1e-8);
    for (Index j = 0; j < 25; ++j) {
        const L1RegSolution one = solve_l1reg(x.col(j), a);
        EXPECT_LE(linf_norm(one.z - cols.z.col(j)), 1e-12);
    }
}

TEST(L1Reg, ParallelismDoesNotChangeResults) {
    Rng rng(5);
    const DenseMatrix a = oracle::orthonormal(80, 4, rng);
    const DenseMatrix x = a * oracle::gaussian(4, 301, rng) + spiked(80, 301, 0.05, 200.0, rng);
    const L1RegSolution one = solve_l1reg_columnwise(x, a, {}, 1);
    const L1RegSolution eight = solve_l1reg_columnwise(x, a, {}, 8);
    const L1RegSolution autodetect = solve_l1reg_columnwise(x, a, {}, 0);
    EXPECT_EQ(one.z, eight.z);
    EXPECT_EQ(one.e, eight.e);
    EXPECT_EQ(one.z, autodetect.z);
    EXPECT_EQ(one.iterations, eight.iterations);
}

TEST(L1Reg, IterationCapIsReportedPerColumn) {
    Rng rng(6);
    const DenseMatrix a = oracle::orthonormal(40, 2, rng);
    const DenseMatrix x = a * oracle::gaussian(2, 5, rng) + spiked(40, 5, 0.2, 10.0, rng);
    AdmConfig cfg;
    cfg.max_iter = 2;
    const L1RegSolution sol = solve_l1reg_columnwise(x, a, cfg);
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.unconverged_columns.size(), 5u);
    EXPECT_EQ(sol.unconverged_columns.front(), 0);
    EXPECT_FALSE(solve_l1reg(x, a, cfg).converged);
}

TEST(L1Reg, RejectsBadDictionaries) {
    Rng rng(7);
    const DenseMatrix x = oracle::gaussian(10, 2, rng);
    EXPECT_THROW(solve_l1reg(x, oracle::gaussian(10, 2, rng)), PreconditionError);
    EXPECT_THROW(solve_l1reg(x, oracle::orthonormal(9, 2, rng)), DimensionError);
    EXPECT_THROW(solve_l1reg_columnwise(x, 2.0 * oracle::orthonormal(10, 2, rng)), PreconditionError);
}

TEST(L1Reg, ZeroDataIsTrivial) {
    Rng rng(8);
    const L1RegSolution sol = solve_l1reg(DenseMatrix::Zero(6, 3), oracle::orthonormal(6, 2, rng));
    EXPECT_TRUE(sol.converged);
    EXPECT_EQ(sol.iterations, 0);
    EXPECT_EQ(sol.z, DenseMatrix::Zero(2, 3));
}
