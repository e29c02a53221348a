#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rpca/pcp_adm.hpp"
#include "rpca/synth.hpp"

using namespace rpca;

TEST(DefaultLambda, Examples) {
    EXPECT_NEAR(default_lambda(2000, 2000), 0.02236, 1e-5);
    EXPECT_DOUBLE_EQ(default_lambda(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(default_lambda(100, 400), 0.05);
    EXPECT_THROW(default_lambda(0, 3), DimensionError);
}

TEST(SpectralNorm, PowerIterationEstimate) {
    Rng rng(2);
    const DenseMatrix m = oracle::gaussian(60, 40, rng);
    EXPECT_NEAR(spectral_norm_estimate(m), svd(m).sigma(0), 1e-4 * svd(m).sigma(0));
    EXPECT_EQ(spectral_norm_estimate(DenseMatrix::Zero(4, 4)), 0.0);
}

TEST(SolvePcp, ZeroMatrix) {
    const PcpSolution sol = solve_pcp(DenseMatrix::Zero(5, 4));
    EXPECT_TRUE(sol.converged);
    EXPECT_EQ(sol.iterations, 1);
    EXPECT_EQ(sol.l, DenseMatrix::Zero(5, 4));
    EXPECT_EQ(sol.s, DenseMatrix::Zero(5, 4));
}

TEST(SolvePcp, CleanRankOne) {
    Rng rng(3);
    const DenseMatrix m = oracle::low_rank(40, 30, 1, rng);
    const PcpSolution sol = solve_pcp(m);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(sol.final_residual, 1e-7);
    EXPECT_LE((sol.l - m).norm() / m.norm(), 1e-6);
    EXPECT_LE(linf_norm(sol.s), 1e-6 * linf_norm(m));
    EXPECT_EQ(sol.rank_of_l, 1);
}

TEST(SolvePcp, ExactRecoveryAcrossSeeds) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthSpec spec;
        spec.m = spec.n = 200;
        spec.rho_r = 0.05;
        spec.rho_s = 0.1;
        spec.rng_seed = seed;
        const GroundTruth gt = generate(spec);
        const PcpSolution sol = solve_pcp(gt.m_obs);
        ASSERT_TRUE(sol.converged) << "seed " << seed;
        EXPECT_LE(sol.final_residual, 1e-7);
        EXPECT_LE((gt.m_obs - sol.l - sol.s).norm(), sol.final_residual * gt.m_obs.norm() * (1 + 1e-9));
        EXPECT_LE(rel_err(sol.l, gt.l0), 100 * 1e-7) << "seed " << seed;
        EXPECT_EQ(numerical_rank(sol.l), 10);

        const double lambda = default_lambda(200, 200);
        const double ours = oracle::nuclear_norm(sol.l) + lambda * l1_norm(sol.s);
        const double truth = oracle::nuclear_norm(gt.l0) + lambda * l1_norm(gt.s0);
        EXPECT_LE(ours, truth * (1 + 1e-3));
    }
}

TEST(SolvePcp, PenaltyIsMonotoneAndCapped) {
    SynthSpec spec;
    spec.m = spec.n = 80;
    spec.rho_r = 0.05;
    spec.rho_s = 0.05;
    spec.rng_seed = 8;
    AdmConfig cfg;
    cfg.record_trace = true;
    cfg.beta0 = 0.01;
    cfg.beta_max = 0.5;
    cfg.rho = 1.3;
    const PcpSolution sol = solve_pcp(generate(spec).m_obs, cfg);
    ASSERT_EQ(sol.beta_trace.size(), static_cast<std::size_t>(sol.iterations));
    EXPECT_DOUBLE_EQ(sol.beta_trace.front(), 0.01);
    for (std::size_t k = 1; k < sol.beta_trace.size(); ++k) {
        EXPECT_GE(sol.beta_trace[k], sol.beta_trace[k - 1]);
        EXPECT_LE(sol.beta_trace[k], 0.5);
    }
    EXPECT_DOUBLE_EQ(sol.beta_trace.back(), 0.5);
}

TEST(SolvePcp, LanczosBackendMatchesDense) {
    SynthSpec spec;
    spec.m = 240;
    spec.n = 200;
    spec.rho_r = 0.025;
    spec.rho_s = 0.05;
    spec.rng_seed = 12;
    const GroundTruth gt = generate(spec);
    AdmConfig dense_cfg;
    dense_cfg.svd_backend = SvdBackend::dense;
    AdmConfig lanczos_cfg;
    lanczos_cfg.svd_backend = SvdBackend::lanczos;
    const PcpSolution a = solve_pcp(gt.m_obs, dense_cfg);
    const PcpSolution b = solve_pcp(gt.m_obs, lanczos_cfg);
    ASSERT_TRUE(a.converged);
    ASSERT_TRUE(b.converged);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_LE(rel_err(b.l, a.l), 1e-8);
    EXPECT_LE(rel_err(b.l, gt.l0), 1e-5);
}

TEST(SolvePcp, NonConvergenceIsFlagged) {
    SynthSpec spec;
    spec.m = spec.n = 60;
    spec.rho_r = 0.05;
    spec.rho_s = 0.05;
    AdmConfig cfg;
    cfg.max_iter = 3;
    const PcpSolution sol = solve_pcp(generate(spec).m_obs, cfg);
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.iterations, 3);
    EXPECT_GT(sol.final_residual, cfg.tol);
}

TEST(SolvePcp, RejectsBadInput) {
    EXPECT_THROW(solve_pcp(DenseMatrix(0, 3)), DimensionError);
    DenseMatrix nan = DenseMatrix::Zero(2, 2);
    nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(solve_pcp(nan), NumericalError);
    AdmConfig cfg;
    cfg.rho = 1.0;
    EXPECT_THROW(solve_pcp(DenseMatrix::Identity(2, 2), cfg), ConfigError);
    cfg = {};
    cfg.beta0 = 2.0;
    cfg.beta_max = 1.0;
    EXPECT_THROW(solve_pcp(DenseMatrix::Identity(2, 2), cfg), ConfigError);
    cfg = {};
    cfg.lambda = -1.0;
    EXPECT_THROW(solve_pcp(DenseMatrix::Identity(2, 2), cfg), ConfigError);
}
