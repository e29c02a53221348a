#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "rpca/matrix_io.hpp"
#include "rpca/synth.hpp"

#ifndef RPCA_CLI_PATH
#error "RPCA_CLI_PATH must point at the rpca executable"
#endif

using namespace rpca;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / "rpca_cli_tests" / info->name();
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(const std::string& args) const {
        const std::string cmd =
            std::string(RPCA_CLI_PATH) + " " + args + " 2>" + path("stderr.txt") + " >" + path("stdout.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const std::string& name) const {
        std::ifstream in(path(name), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    nlohmann::json stats(const std::string& name) const { return nlohmann::json::parse(slurp(name)); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthWritesConsistentGroundTruth) {
    ASSERT_EQ(run("synth --m 2000 --rho-r 0.01 --rho-s 0.01 --seed 1 --out-l0 " + path("l0.dmat") +
                  " --out-s0 " + path("s0.dmat")),
              0);
    const DenseMatrix s0 = read_matrix(path("s0.dmat"));
    EXPECT_EQ(l0_count(s0, 0.0), 40000u);
    const DenseMatrix l0 = read_matrix(path("l0.dmat"));
    EXPECT_EQ(numerical_rank(l0), 20);
}

TEST_F(Cli, SynthIsDeterministicAndHonoursZeroSparsity) {
    const std::string base = "synth --m 60 --n 40 --rho-r 0.05 --rho-s 0 --seed 5 --out-m ";
    ASSERT_EQ(run(base + path("a.csv") + " --out-s0 " + path("s0.csv")), 0);
    ASSERT_EQ(run(base + path("b.csv")), 0);
    EXPECT_EQ(slurp("a.csv"), slurp("b.csv"));
    const DenseMatrix s0 = read_matrix(path("s0.csv"));
    EXPECT_EQ(s0.rows(), 60);
    EXPECT_EQ(s0.cols(), 40);
    EXPECT_EQ(linf_norm(s0), 0.0);
}

TEST_F(Cli, DecomposeWithTruthAndBothMethods) {
    ASSERT_EQ(run("synth --m 300 --rank 3 --rho-s 0.01 --seed 2 --out-m " + path("m.dmat") +
                  " --out-l0 " + path("l0.dmat")),
              0);
    ASSERT_EQ(run("decompose " + path("m.dmat") + " --rank-hint 3 --seed 4 --truth " + path("l0.dmat") +
                  " --out-l " + path("l1f.dmat") + " --out-s " + path("s1f.dmat") + " --stats-json " +
                  path("l1f.json")),
              0);
    const auto j = stats("l1f.json");
    EXPECT_EQ(j["method"], "l1filter");
    EXPECT_EQ(j["rank"], 3);
    EXPECT_LE(j["rel_err"].get<double>(), 1e-5);
    const double total = j["times"]["total"].get<double>();
    const double parts = j["times"]["seed_recovery"].get<double>() + j["times"]["filtering"].get<double>() +
                         j["times"]["assembly"].get<double>();
    EXPECT_LE(parts, total + 1e-3);

    ASSERT_EQ(run("decompose " + path("m.dmat") + " --method adm --out-l " + path("adm.dmat") +
                  " --stats-json " + path("adm.json")),
              0);
    EXPECT_TRUE(stats("adm.json")["rel_err"].is_null());
    const DenseMatrix a = read_matrix(path("l1f.dmat"));
    const DenseMatrix b = read_matrix(path("adm.dmat"));
    EXPECT_LE(rel_err(a, b), 1e-4);
    const DenseMatrix m = read_matrix(path("m.dmat"));
    EXPECT_LE(linf_norm(a + read_matrix(path("s1f.dmat")) - m), 4 * std::numeric_limits<double>::epsilon() * linf_norm(m));
}

TEST_F(Cli, DecomposeIsDeterministic) {
    ASSERT_EQ(run("synth --m 120 --rank 2 --rho-s 0.02 --seed 3 --out-m " + path("m.csv")), 0);
    ASSERT_EQ(run("decompose " + path("m.csv") + " --seed 9 --threads 1 --out-l " + path("a.csv")), 0);
    ASSERT_EQ(run("decompose " + path("m.csv") + " --seed 9 --threads 1 --out-l " + path("b.csv")), 0);
    EXPECT_EQ(slurp("a.csv"), slurp("b.csv"));
}

TEST_F(Cli, ZeroMatrixDecomposesToZero) {
    write_csv(path("zero.csv"), DenseMatrix::Zero(20, 15));
    ASSERT_EQ(run("decompose " + path("zero.csv") + " --out-l " + path("l.csv") + " --out-s " + path("s.csv")), 0);
    EXPECT_EQ(read_matrix(path("l.csv")), DenseMatrix::Zero(20, 15));
    EXPECT_EQ(read_matrix(path("s.csv")), DenseMatrix::Zero(20, 15));
}

TEST_F(Cli, ExitCodes) {
    std::ofstream(path("bad.csv")) << "1,2\n3\n";
    EXPECT_EQ(run("decompose " + path("bad.csv")), 1);
    EXPECT_NE(slurp("stderr.txt").find("expected 2 values"), std::string::npos);
    EXPECT_EQ(run("decompose " + path("missing.csv")), 1);
    EXPECT_EQ(run("decompose"), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("decompose x.csv --method svd"), 1);

    std::ofstream(path("empty.csv")) << "\n";
    EXPECT_EQ(run("decompose " + path("empty.csv")), 3);
    ASSERT_EQ(run("synth --m 20 --rank 2 --seed 1 --out-m " + path("m.csv") + " --out-l0 " + path("l0.csv")),
              0);
    write_csv(path("small.csv"), DenseMatrix::Zero(3, 3));
    EXPECT_EQ(run("decompose " + path("m.csv") + " --truth " + path("small.csv")), 3);
    EXPECT_EQ(run("decompose " + path("m.csv") + " --method adm --tol 1e-300"), 2);
    EXPECT_EQ(run("synth --m 10 --rho-s 2"), 1);
}

TEST_F(Cli, CheckerboardWritesImages) {
    ASSERT_EQ(run("checkerboard --m 128 --cell 16 --fraction 0.1 --seed 3 --solve --out " + path("board")), 0);
    for (const char* suffix : {"_clean", "_corrupted", "_recovered"}) {
        EXPECT_TRUE(fs::exists(path(std::string("board") + suffix + ".pgm"))) << suffix;
        EXPECT_TRUE(fs::exists(path(std::string("board") + suffix + ".dmat"))) << suffix;
    }
    const DenseMatrix clean = read_matrix(path("board_clean.dmat"));
    const DenseMatrix recovered = read_matrix(path("board_recovered.dmat"));
    EXPECT_LE(max_dif(recovered, clean), 1e-3);
    EXPECT_EQ(run("checkerboard --m 100 --cell 16 --out " + path("bad")), 1);
}

TEST_F(Cli, BenchWritesReports) {
    ASSERT_EQ(run("bench --suite table1 --scale 0.05 --quiet --out " + path("r.json")), 0);
    const auto j = stats("r.json");
    EXPECT_EQ(j["schema"], "rpca-bench/1");
    EXPECT_EQ(j["records"].size(), 2u);
    ASSERT_EQ(run("bench --suite sigma-sweep --scale 0.05 --quiet --out " + path("r.csv")), 0);
    const std::string csv = slurp("r.csv");
    EXPECT_EQ(csv.rfind("# schema: rpca-bench/1\nsuite,method,", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
    EXPECT_EQ(run("bench --suite bogus"), 1);
}
