#pragma once

// Benchmark harness: scaled reproductions of the synthetic experiments, with
// CSV / JSON reports and a log-log power-law fit for the size sweep.
//
// CSV schema (rpca-bench/1). The first line is "# schema: rpca-bench/1",
// then this fixed header:
//
//   suite,method,m,n,r,rho_s,sigma_scale,rel_err,max_dif,ave_dif,rank_l,
//   l0_s,l1_s,iters,seconds,t_seed,t_filter,t_assembly,seed,status
//
// Empty metric cells mean "no ground truth". status is "ok",
// "unconverged", or "error: <message>".

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rpca/l1filter.hpp"
#include "rpca/pcp_adm.hpp"
#include "rpca/synth.hpp"

namespace rpca {

inline constexpr const char* kReportSchema = "rpca-bench/1";

inline const std::vector<std::string>& bench_csv_columns() {
    static const std::vector<std::string> cols = {
        "suite",  "method", "m",       "n",        "r",          "rho_s", "sigma_scale",
        "rel_err", "max_dif", "ave_dif", "rank_l", "l0_s",       "l1_s",  "iters",
        "seconds", "t_seed", "t_filter", "t_assembly", "seed",   "status"};
    return cols;
}

inline const std::vector<std::string>& bench_suites() {
    static const std::vector<std::string> names = {"table1",       "rank-sweep",
                                                   "sparsity-sweep", "sigma-sweep",
                                                   "size-sweep",   "checkerboard"};
    return names;
}

struct RecoveryMetrics {
    double rel_err = 0.0;
    double max_dif = 0.0;
    double ave_dif = 0.0;
};

inline RecoveryMetrics recovery_metrics(const DenseMatrix& l_star, const DenseMatrix& l0) {
    return {rel_err(l_star, l0), max_dif(l_star, l0), ave_dif(l_star, l0)};
}

struct BenchRecord {
    std::string suite;
    std::string method;
    Index m = 0;
    Index n = 0;
    Index r = 0;
    double rho_s = 0.0;
    double sigma_scale = 1.0;
    std::optional<RecoveryMetrics> metrics;
    Index rank_l = 0;
    std::size_t l0_s = 0;
    double l1_s = 0.0;
    int iters = 0;
    double seconds = 0.0;
    StageTimes stages;
    std::uint64_t seed = 0;
    std::string status = "ok";
};

struct PowerLawFit {
    double exponent = 0.0;
    double coefficient = 0.0;  // y ~ coefficient * x^exponent
};

/// Least-squares line through (log x, log y).
inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DimensionError("fit_power_law: need at least two paired samples");
    const auto k = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0))
            throw ConfigError("fit_power_law: samples must be positive");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = k * sxx - sx * sx;
    if (denom == 0.0) throw ConfigError("fit_power_law: x values are all equal");
    PowerLawFit fit;
    fit.exponent = (k * sxy - sx * sy) / denom;
    fit.coefficient = std::exp((sy - fit.exponent * sx) / k);
    return fit;
}

struct BenchReport {
    std::string suite;
    std::vector<BenchRecord> records;
    std::map<std::string, PowerLawFit> time_fits;  // per method, size-sweep only
    nlohmann::json environment;
};

struct BenchOptions {
    std::string suite = "table1";
    std::optional<double> scale;  // suite default when empty
    int seeds = 1;
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
    bool run_adm = true;
    std::function<void(const BenchRecord&)> on_record;  // progress hook
};

/// Desk-scale default for each suite; sizes are reference sizes times scale.
inline double default_scale(const std::string& suite) {
    if (suite == "table1") return 0.25;
    if (suite == "rank-sweep" || suite == "sparsity-sweep" || suite == "sigma-sweep") return 0.5;
    return 1.0;
}

inline nlohmann::json bench_environment(unsigned threads) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
    std::ostringstream eigen;
    eigen << "Eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
          << EIGEN_MINOR_VERSION;
    return {
        {"timestamp", stamp},
        {"backend",
         {{"linear_algebra", eigen.str()},
          {"simd", Eigen::SimdInstructionSetsInUse()},
          {"svd", "LAPACK gesdd dense; Lanczos bidiagonalization for large ADM inputs"},
          {"hardware_threads", std::thread::hardware_concurrency()},
          {"threads", threads}}},
    };
}

/// Filter settings for the impulsive-noise checkerboard. Its low-contrast
/// outliers need a larger seed than the default rates give.
inline FilterConfig checkerboard_filter_config(std::uint64_t seed = 0) {
    FilterConfig cfg;
    cfg.s_r = 30.0;
    cfg.s_c = 30.0;
    cfg.rng_seed = seed;
    return cfg;
}

namespace detail {

inline PcpSolution run_method(const std::string& method, const DenseMatrix& m,
                              std::optional<Index> rank_hint, std::uint64_t seed,
                              unsigned threads, FilterConfig cfg = {}) {
    if (method == "adm") return solve_pcp(m);
    cfg.rank_hint = rank_hint;
    cfg.rng_seed = seed;
    cfg.threads = threads;
    return estimate_rank_and_solve(m, cfg);
}

inline BenchRecord measure(const std::string& suite, const std::string& method,
                           const GroundTruth& gt, Index r, double rho_s, double sigma,
                           std::optional<Index> rank_hint, std::uint64_t seed,
                           unsigned threads, const FilterConfig& base = {}) {
    BenchRecord rec;
    rec.suite = suite;
    rec.method = method;
    rec.m = gt.m_obs.rows();
    rec.n = gt.m_obs.cols();
    rec.r = r;
    rec.rho_s = rho_s;
    rec.sigma_scale = sigma;
    rec.seed = seed;
    try {
        const PcpSolution sol = run_method(method, gt.m_obs, rank_hint, seed, threads, base);
        rec.metrics = recovery_metrics(sol.l, gt.l0);
        rec.rank_l = sol.rank_of_l;
        rec.l0_s = l0_count(sol.s);
        rec.l1_s = l1_norm(sol.s);
        rec.iters = sol.iterations;
        rec.seconds = sol.elapsed;
        rec.stages = sol.stages;
        if (sol.method != "adm" && sol.method != "l1filter") rec.method = sol.method;
        rec.status = sol.converged ? "ok" : "unconverged";
    } catch (const std::exception& e) {
        rec.status = std::string("error: ") + e.what();
    }
    return rec;
}

}  // namespace detail

/// Runs one suite. Individual failures are recorded per row; the suite
/// always runs to completion.
inline BenchReport run_suite(const BenchOptions& opt) {
    const auto& names = bench_suites();
    if (std::find(names.begin(), names.end(), opt.suite) == names.end())
        throw ConfigError("bench: unknown suite '" + opt.suite + "'");
    if (opt.seeds < 1) throw ConfigError("bench: seeds must be >= 1");
    const double scale = opt.scale.value_or(default_scale(opt.suite));
    if (!(scale > 0)) throw ConfigError("bench: scale must be positive");
    auto scaled = [scale](double base) {
        return std::max<Index>(2, static_cast<Index>(std::llround(base * scale)));
    };

    BenchReport report;
    report.suite = opt.suite;
    report.environment = bench_environment(opt.threads);
    auto push = [&](BenchRecord rec) {
        if (opt.on_record) opt.on_record(rec);
        report.records.push_back(std::move(rec));
    };
    std::vector<std::string> methods = {"l1filter"};
    if (opt.run_adm) methods.push_back("adm");

    auto synthetic = [&](Index m, double rho_r, std::optional<Index> fixed_rank, double rho_s,
                         double sigma, const std::vector<std::string>& which) {
        for (int k = 0; k < opt.seeds; ++k) {
            SynthSpec spec;
            spec.m = m;
            spec.n = m;
            spec.rho_r = rho_r;
            spec.rank_override = fixed_rank;
            spec.rho_s = rho_s;
            spec.sigma_scale = sigma;
            spec.rng_seed = opt.base_seed + static_cast<std::uint64_t>(k);
            const GroundTruth gt = generate(spec);
            for (const auto& method : which)
                push(detail::measure(opt.suite, method, gt, spec.rank(), rho_s, sigma,
                                     spec.rank(), spec.rng_seed, opt.threads));
        }
    };

    if (opt.suite == "table1") {
        synthetic(scaled(2000), 0.01, std::nullopt, 0.01, 1.0, methods);
    } else if (opt.suite == "rank-sweep") {
        for (double rho_r : {0.005, 0.01, 0.02, 0.03, 0.04, 0.05})
            synthetic(scaled(1000), rho_r, std::nullopt, 0.02, 1.0, methods);
    } else if (opt.suite == "sparsity-sweep") {
        for (double rho_s : {0.02, 0.05, 0.1, 0.15, 0.2})
            synthetic(scaled(1000), 0.005, std::nullopt, rho_s, 1.0, methods);
    } else if (opt.suite == "sigma-sweep") {
        for (int sigma = 1; sigma <= 10; ++sigma)
            synthetic(scaled(1000), 0.01, std::nullopt, 0.01, sigma, {"l1filter"});
    } else if (opt.suite == "size-sweep") {
        for (double base : {1000.0, 2000.0, 4000.0})
            synthetic(scaled(base), 0.0, Index{10}, 0.01, 1.0, methods);
        for (const auto& method : methods) {
            std::vector<double> sizes, times;
            for (const auto& rec : report.records) {
                if (rec.method != method || rec.status.rfind("error", 0) == 0) continue;
                sizes.push_back(static_cast<double>(rec.n));
                times.push_back(rec.seconds);
            }
            if (sizes.size() >= 2) report.time_fits[method] = fit_power_law(sizes, times);
        }
    } else if (opt.suite == "checkerboard") {
        const Index m = std::max<Index>(8, 8 * (scaled(512) / 8));
        for (int k = 0; k < opt.seeds; ++k) {
            const std::uint64_t seed = opt.base_seed + static_cast<std::uint64_t>(k);
            const GroundTruth gt = corrupt_impulsive(checkerboard(m, m / 8), 0.1, seed);
            push(detail::measure(opt.suite, "l1filter", gt, 2, 0.1, 1.0, std::nullopt, seed,
                                 opt.threads, checkerboard_filter_config()));
        }
    }
    return report;
}

namespace detail {

inline std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace detail

inline void write_report_csv(std::ostream& out, const BenchReport& report) {
    out << "# schema: " << kReportSchema << '\n';
    const auto& cols = bench_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    using detail::csv_number;
    for (const auto& r : report.records) {
        const auto metric = [&](double RecoveryMetrics::*field) {
            return r.metrics ? csv_number((*r.metrics).*field) : std::string();
        };
        out << detail::csv_quote(r.suite) << ',' << detail::csv_quote(r.method) << ',' << r.m
            << ',' << r.n << ',' << r.r << ',' << csv_number(r.rho_s) << ','
            << csv_number(r.sigma_scale) << ',' << metric(&RecoveryMetrics::rel_err) << ','
            << metric(&RecoveryMetrics::max_dif) << ',' << metric(&RecoveryMetrics::ave_dif)
            << ',' << r.rank_l << ',' << r.l0_s << ',' << csv_number(r.l1_s) << ',' << r.iters
            << ',' << csv_number(r.seconds) << ',' << csv_number(r.stages.seed_recovery) << ','
            << csv_number(r.stages.filtering) << ',' << csv_number(r.stages.assembly) << ','
            << r.seed << ',' << detail::csv_quote(r.status) << '\n';
    }
}

inline nlohmann::json record_json(const BenchRecord& r) {
    nlohmann::json j = {
        {"suite", r.suite},     {"method", r.method},       {"m", r.m},
        {"n", r.n},             {"r", r.r},                 {"rho_s", r.rho_s},
        {"sigma_scale", r.sigma_scale},
        {"rank_l", r.rank_l},   {"l0_s", r.l0_s},           {"l1_s", r.l1_s},
        {"iters", r.iters},     {"seconds", r.seconds},
        {"t_seed", r.stages.seed_recovery}, {"t_filter", r.stages.filtering},
        {"t_assembly", r.stages.assembly},
        {"seed", r.seed},       {"status", r.status},
    };
    j["rel_err"] = r.metrics ? nlohmann::json(r.metrics->rel_err) : nlohmann::json(nullptr);
    j["max_dif"] = r.metrics ? nlohmann::json(r.metrics->max_dif) : nlohmann::json(nullptr);
    j["ave_dif"] = r.metrics ? nlohmann::json(r.metrics->ave_dif) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json report_json(const BenchReport& report) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) records.push_back(record_json(r));
    nlohmann::json fits = nlohmann::json::object();
    for (const auto& [method, fit] : report.time_fits)
        fits[method] = {{"exponent", fit.exponent}, {"coefficient", fit.coefficient}};
    return {{"schema", kReportSchema},
            {"suite", report.suite},
            {"environment", report.environment},
            {"records", records},
            {"time_fits", fits}};
}

/// Statistics of a single decomposition, as emitted by `rpca decompose`.
inline nlohmann::json solution_stats(const PcpSolution& sol,
                                     const std::optional<RecoveryMetrics>& metrics) {
    nlohmann::json j = {
        {"method", sol.method},
        {"m", sol.l.rows()},
        {"n", sol.l.cols()},
        {"converged", sol.converged},
        {"final_residual", sol.final_residual},
        {"rank", sol.rank_of_l},
        {"iterations", sol.iterations},
        {"filter_iterations", sol.filter_iterations},
        {"seed_rows", sol.seed_rows},
        {"seed_cols", sol.seed_cols},
        {"rank_attempts", sol.rank_attempts},
        {"unconverged_columns", sol.unconverged_columns},
        {"unconverged_rows", sol.unconverged_rows},
        {"l0_s", l0_count(sol.s)},
        {"l1_s", l1_norm(sol.s)},
        {"times",
         {{"total", sol.elapsed},
          {"seed_recovery", sol.stages.seed_recovery},
          {"filtering", sol.stages.filtering},
          {"assembly", sol.stages.assembly}}},
    };
    j["rel_err"] = metrics ? nlohmann::json(metrics->rel_err) : nlohmann::json(nullptr);
    j["max_dif"] = metrics ? nlohmann::json(metrics->max_dif) : nlohmann::json(nullptr);
    j["ave_dif"] = metrics ? nlohmann::json(metrics->ave_dif) : nlohmann::json(nullptr);
    return j;
}

}  // namespace rpca
