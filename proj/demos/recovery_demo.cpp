#include <iostream>

#include "rpca/rpca.hpp"

int main(int argc, char** argv) {
    using namespace rpca;
    SynthSpec spec;
    spec.m = spec.n = argc > 1 ? std::stol(argv[1]) : 1000;
    spec.rho_r = 0.01;
    spec.rho_s = 0.01;
    spec.rng_seed = 7;
    const GroundTruth gt = generate(spec);

    FilterConfig cfg;
    cfg.rank_hint = spec.rank();
    const PcpSolution fast = estimate_rank_and_solve(gt.m_obs, cfg);
    std::cout << "l1 filtering  " << fast.elapsed << " s  RelErr " << rel_err(fast.l, gt.l0)
              << "  rank " << fast.rank_of_l << "  (seed " << fast.stages.seed_recovery
              << " s, filter " << fast.stages.filtering << " s)\n";

    const PcpSolution full = solve_pcp(gt.m_obs);
    std::cout << "full ADM      " << full.elapsed << " s  RelErr " << rel_err(full.l, gt.l0)
              << "  rank " << full.rank_of_l << "  (" << full.iterations << " iterations)\n";
}
