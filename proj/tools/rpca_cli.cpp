// rpca: command-line front end.
//
//   rpca decompose INPUT [--method l1filter|adm] [--truth L0] --out-l L --out-s S
//   rpca synth --m 500 --rho-r 0.01 --rho-s 0.01 --out-m M.dmat ...
//   rpca checkerboard --m 512 --cell 64 --fraction 0.1 --out board
//   rpca bench --suite table1 --seeds 5 --out report.csv
//
// Exit codes: 0 success, 1 parse/usage failure, 2 non-convergence,
// 3 dimension error, 4 other runtime failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rpca/bench.hpp"
#include "rpca/rpca.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kParseFailure = 1,
    kNotConverged = 2,
    kDimensionError = 3,
    kRuntimeFailure = 4,
};

struct DecomposeArgs {
    std::string input;
    std::string method = "l1filter";
    std::optional<double> lambda;
    double tol = 1e-7;
    std::optional<long> rank_hint;
    double oversample_rows = 10.0;
    double oversample_cols = 10.0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool cross_validate = false;
    std::string out_l;
    std::string out_s;
    std::string stats_json;
    std::string truth;
};

int run_decompose(const DecomposeArgs& a) {
    const rpca::DenseMatrix m = rpca::read_matrix(a.input);
    if (m.size() == 0) throw rpca::DimensionError("input matrix " + a.input + " is empty");

    std::optional<rpca::DenseMatrix> truth;
    if (!a.truth.empty()) {
        truth = rpca::read_matrix(a.truth);
        if (truth->rows() != m.rows() || truth->cols() != m.cols())
            throw rpca::DimensionError("truth matrix shape does not match input");
    }

    rpca::AdmConfig adm;
    adm.lambda = a.lambda;
    adm.tol = a.tol;

    rpca::PcpSolution sol;
    if (a.method == "adm") {
        sol = rpca::solve_pcp(m, adm);
    } else {
        rpca::FilterConfig cfg;
        cfg.adm = adm;
        if (a.rank_hint) cfg.rank_hint = static_cast<rpca::Index>(*a.rank_hint);
        cfg.s_r = a.oversample_rows;
        cfg.s_c = a.oversample_cols;
        cfg.rng_seed = a.seed;
        cfg.threads = a.threads;
        cfg.cross_validate = a.cross_validate;
        sol = rpca::estimate_rank_and_solve(m, cfg);
    }

    if (!a.out_l.empty()) rpca::write_matrix(a.out_l, sol.l);
    if (!a.out_s.empty()) rpca::write_matrix(a.out_s, sol.s);

    std::optional<rpca::RecoveryMetrics> metrics;
    if (truth) metrics = rpca::recovery_metrics(sol.l, *truth);
    const nlohmann::json stats = rpca::solution_stats(sol, metrics);
    if (!a.stats_json.empty()) {
        std::ofstream out(a.stats_json);
        if (!out) throw rpca::Error("cannot open " + a.stats_json + " for writing");
        out << stats.dump(2) << '\n';
    }

    std::cerr << "rpca: " << sol.method << " rank " << sol.rank_of_l << ", residual "
              << sol.final_residual << ", " << sol.elapsed << " s\n";
    if (!sol.converged) {
        std::cerr << "rpca: solver did not converge\n";
        return kNotConverged;
    }
    return kOk;
}

struct SynthArgs {
    rpca::SynthSpec spec;
    std::optional<long> rank;
    std::string out_m;
    std::string out_l0;
    std::string out_s0;
};

int run_synth(SynthArgs a) {
    if (a.spec.n == 0) a.spec.n = a.spec.m;
    if (a.rank) a.spec.rank_override = static_cast<rpca::Index>(*a.rank);
    const rpca::GroundTruth gt = rpca::generate(a.spec);
    // Observed matrix carries sigma * S0; the S0 file holds the scaled part
    // so that M = L0 + S0 holds file-to-file.
    if (!a.out_m.empty()) rpca::write_matrix(a.out_m, gt.m_obs);
    if (!a.out_l0.empty()) rpca::write_matrix(a.out_l0, gt.l0);
    if (!a.out_s0.empty()) rpca::write_matrix(a.out_s0, a.spec.sigma_scale * gt.s0);
    std::cerr << "rpca: generated " << a.spec.m << " x " << a.spec.n << ", rank "
              << a.spec.rank() << ", " << a.spec.support_size() << " corrupted entries\n";
    return kOk;
}

struct CheckerArgs {
    long m = 512;
    long cell = 64;
    double fraction = 0.1;
    std::uint64_t seed = 0;
    std::string out = "checkerboard";
    bool solve = false;
};

int run_checkerboard(const CheckerArgs& a) {
    const rpca::DenseMatrix clean = rpca::checkerboard(a.m, a.cell);
    const rpca::GroundTruth gt = rpca::corrupt_impulsive(clean, a.fraction, a.seed);
    rpca::write_matrix(a.out + "_clean.dmat", gt.l0);
    rpca::write_matrix(a.out + "_corrupted.dmat", gt.m_obs);
    rpca::write_pgm(a.out + "_clean.pgm", gt.l0);
    rpca::write_pgm(a.out + "_corrupted.pgm", gt.m_obs);
    if (!a.solve) return kOk;

    const rpca::PcpSolution sol =
        rpca::estimate_rank_and_solve(gt.m_obs, rpca::checkerboard_filter_config(a.seed));
    rpca::write_matrix(a.out + "_recovered.dmat", sol.l);
    rpca::write_pgm(a.out + "_recovered.pgm", sol.l);
    std::cerr << "rpca: recovered rank " << sol.rank_of_l << ", max deviation "
              << rpca::max_dif(sol.l, gt.l0) << ", " << sol.elapsed << " s\n";
    return sol.converged ? kOk : kNotConverged;
}

struct BenchArgs {
    rpca::BenchOptions opt;
    std::string out;
    bool quiet = false;
};

int run_bench(BenchArgs a) {
    if (!a.quiet) {
        a.opt.on_record = [](const rpca::BenchRecord& r) {
            std::cerr << r.suite << ' ' << r.method << " m=" << r.m << " r=" << r.r
                      << " rho_s=" << r.rho_s << " sigma=" << r.sigma_scale << " rel_err="
                      << (r.metrics ? std::to_string(r.metrics->rel_err) : "-")
                      << " t=" << r.seconds << "s " << r.status << '\n';
        };
    }
    const rpca::BenchReport report = rpca::run_suite(a.opt);
    for (const auto& [method, fit] : report.time_fits)
        std::cerr << "time exponent " << method << ": " << fit.exponent << '\n';

    const bool json = a.out.size() >= 5 && a.out.compare(a.out.size() - 5, 5, ".json") == 0;
    if (a.out.empty() || a.out == "-") {
        rpca::write_report_csv(std::cout, report);
    } else {
        std::ofstream out(a.out);
        if (!out) throw rpca::Error("cannot open " + a.out + " for writing");
        if (json)
            out << rpca::report_json(report).dump(2) << '\n';
        else
            rpca::write_report_csv(out, report);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust PCA by l1 filtering and ADM"};
    app.require_subcommand(1);

    DecomposeArgs dec;
    auto* decompose = app.add_subcommand("decompose", "Split a matrix into low-rank + sparse parts");
    decompose->add_option("input", dec.input, "Input matrix (CSV or DMAT)")->required();
    decompose->add_option("--method", dec.method, "Solver")
        ->check(CLI::IsMember({"l1filter", "adm"}));
    decompose->add_option("--lambda", dec.lambda, "Sparse weight (default 1/sqrt(max(m,n)))");
    decompose->add_option("--tol", dec.tol, "Stopping tolerance");
    decompose->add_option("--rank-hint", dec.rank_hint, "Target rank estimate");
    decompose->add_option("--oversample-rows", dec.oversample_rows, "Row oversampling rate s_r");
    decompose->add_option("--oversample-cols", dec.oversample_cols, "Column oversampling rate s_c");
    decompose->add_option("--seed", dec.seed, "RNG seed for seed-block sampling");
    decompose->add_option("--threads", dec.threads, "Worker threads (0 = all cores)");
    decompose->add_flag("--cross-validate", dec.cross_validate, "Confirm rank on a second sample");
    decompose->add_option("--out-l", dec.out_l, "Low-rank output (.csv or binary)");
    decompose->add_option("--out-s", dec.out_s, "Sparse output (.csv or binary)");
    decompose->add_option("--stats-json", dec.stats_json, "Write solver statistics as JSON");
    decompose->add_option("--truth", dec.truth, "Ground-truth low-rank matrix for error metrics");

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic low-rank + sparse problem");
    synth->add_option("--m", syn.spec.m, "Rows")->required();
    synth->add_option("--n", syn.spec.n, "Columns (default m)");
    synth->add_option("--rho-r", syn.spec.rho_r, "Rank ratio r/m");
    synth->add_option("--rank", syn.rank, "Explicit rank (overrides --rho-r)");
    synth->add_option("--rho-s", syn.spec.rho_s, "Sparsity ratio p/(mn)");
    synth->add_option("--magnitude", syn.spec.magnitude, "Sparse values ~ U[-mag, mag]");
    synth->add_option("--sigma", syn.spec.sigma_scale, "Sparse part multiplier");
    synth->add_option("--seed", syn.spec.rng_seed, "RNG seed");
    synth->add_option("--out-m", syn.out_m, "Observed matrix");
    synth->add_option("--out-l0", syn.out_l0, "Low-rank ground truth");
    synth->add_option("--out-s0", syn.out_s0, "Sparse ground truth");

    CheckerArgs chk;
    auto* board = app.add_subcommand("checkerboard", "Rank-2 checkerboard with impulsive noise");
    board->add_option("--m", chk.m, "Image size");
    board->add_option("--cell", chk.cell, "Cell size (must divide m)");
    board->add_option("--fraction", chk.fraction, "Fraction of corrupted pixels");
    board->add_option("--seed", chk.seed, "RNG seed");
    board->add_option("--out", chk.out, "Output prefix");
    board->add_flag("--solve", chk.solve, "Also recover the image by l1 filtering");

    BenchArgs ben;
    auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
    bench->add_option("--suite", ben.opt.suite, "Suite name")
        ->check(CLI::IsMember(rpca::bench_suites()));
    bench->add_option("--scale", ben.opt.scale, "Size multiplier on the reference sizes");
    bench->add_option("--seeds", ben.opt.seeds, "Instances per setting");
    bench->add_option("--base-seed", ben.opt.base_seed, "First RNG seed");
    bench->add_option("--threads", ben.opt.threads, "Worker threads for l1 filtering");
    bench->add_flag("!--no-adm", ben.opt.run_adm, "Skip the full ADM baseline");
    bench->add_option("--out", ben.out, "Report path (.csv or .json; '-' for stdout CSV)");
    bench->add_flag("--quiet", ben.quiet, "No per-record progress");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kParseFailure;
    }

    try {
        if (*decompose) return run_decompose(dec);
        if (*synth) return run_synth(syn);
        if (*board) return run_checkerboard(chk);
        if (*bench) return run_bench(ben);
    } catch (const rpca::ParseError& e) {
        std::cerr << "rpca: " << e.what() << '\n';
        return kParseFailure;
    } catch (const rpca::DimensionError& e) {
        std::cerr << "rpca: " << e.what() << '\n';
        return kDimensionError;
    } catch (const rpca::ConfigError& e) {
        std::cerr << "rpca: " << e.what() << '\n';
        return kParseFailure;
    } catch (const std::exception& e) {
        std::cerr << "rpca: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kParseFailure;
}
