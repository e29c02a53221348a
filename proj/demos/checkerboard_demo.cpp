// Corrupts a 512 x 512 checkerboard with impulsive noise, recovers it, and
// writes the three images as PGM into the current directory.

#include <iostream>

#include "rpca/bench.hpp"
#include "rpca/rpca.hpp"

int main() {
    using namespace rpca;
    const GroundTruth gt = corrupt_impulsive(checkerboard(512, 64), 0.1, 2024);
    const PcpSolution sol = estimate_rank_and_solve(gt.m_obs, checkerboard_filter_config(2024));

    write_pgm("board_clean.pgm", gt.l0);
    write_pgm("board_corrupted.pgm", gt.m_obs);
    write_pgm("board_recovered.pgm", sol.l);

    std::cout << "seed " << sol.seed_rows << " x " << sol.seed_cols << ", rank " << sol.rank_of_l
              << ", max pixel error " << max_dif(sol.l, gt.l0) << ", " << sol.elapsed << " s\n";
}
