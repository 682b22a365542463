#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "qmcslice/dataset.hpp"
#include "qmcslice/directions.hpp"
#include "qmcslice/fastsum.hpp"
#include "qmcslice/kernels.hpp"

namespace fs = std::filesystem;
using namespace qmcslice;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("qmcslice_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("QMCSLICE_OUTPUT_DIR");
    unsetenv("QMCSLICE_STREAM");
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::vector<double> read_lines(const std::string& p) {
  std::ifstream f(p);
  std::vector<double> v;
  for (double x; f >> x;) v.push_back(x);
  return v;
}

// Strips the time_s column (third) from bench CSV output.
std::string without_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() > 2) cols.erase(cols.begin() + 2);
    for (const auto& c : cols) out += c + ",";
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_F(CliTest, GenDirsOrthogonal) {
  const auto r = run({"gen-dirs", "--method", "orthogonal", "--d", "8", "--p", "8", "--seed", "1", "--out", path("o.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto dirs = load_directions(path("o.txt"));
  ASSERT_EQ(dirs.P(), 8);
  EXPECT_LT((dirs.vectors * dirs.vectors.transpose() - Matrix::Identity(8, 8)).norm(), 1e-12);
  EXPECT_NE(r.out.find("E_sym="), std::string::npos);
}

TEST_F(CliTest, GenDirsDistanceReachesOptimum) {
  const auto r = run({"gen-dirs", "--method", "distance", "--d", "4", "--p", "4", "--out", path("d.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const double e = std::stod(r.out.substr(r.out.find("E_sym=") + 6));
  EXPECT_NEAR(e, -16 - 48 * std::sqrt(2.0), 0.001 * 83.88);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({"gen-dirs", "--method", "iid", "--p", "0"}).code, 2);
  EXPECT_EQ(run({"gen-dirs", "--method", "bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"rate", "--p-list", "16"}).code, 2);
  EXPECT_EQ(run({"sum", "--method", "warp:iid"}).code, 2);
  const auto r = run({"gen-dirs", "--method", "iid", "--p", "0"});
  EXPECT_EQ(r.err.rfind("error: parameter: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ParseAndCapabilityErrors) {
  {
    std::ofstream f(path("bad.csv"));
    f << "1,2,3\n4,5\n";
  }
  const auto p = run({"sum", "--x", path("bad.csv"), "--method", "naive"});
  EXPECT_EQ(p.code, 3);
  EXPECT_EQ(p.err.rfind("error: parse: ", 0), 0u);
  EXPECT_EQ(run({"sum", "--x", path("missing.csv")}).code, 3);
  const auto c = run({"sum", "--kernel", "riesz", "--method", "fourier:iid", "--n", "50"});
  EXPECT_EQ(c.code, 4) << c.err;
  EXPECT_EQ(c.err.rfind("error: capability: ", 0), 0u);
  EXPECT_EQ(run({"sum", "--kernel", "gauss", "--method", "sorting:iid", "--n", "50"}).code, 4);
}

TEST_F(CliTest, SumFourierAgainstNaive) {
  ASSERT_EQ(run({"gen-data", "--n", "300", "--d", "3", "--seed", "4", "--out", path("x.csv")}).code, 0);
  const auto r = run({"sum", "--x", path("x.csv"), "--kernel", "gauss", "--method", "fourier:distance", "--p", "64",
                      "--compare-naive", "--out", path("s.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_lines(path("s.txt")).size(), 300u);
  EXPECT_NE(r.out.find("tau="), std::string::npos);
  EXPECT_NE(r.out.find("n_ft=128"), std::string::npos);
  EXPECT_NE(r.out.find("time_s="), std::string::npos);
  const double e = std::stod(r.out.substr(r.out.find("rel_l1_vs_naive=") + 16));
  EXPECT_LT(e, 1e-2);
}

TEST_F(CliTest, DefaultWeightsAreOne) {
  Matrix x(2, 2), y(1, 2);
  x << 0, 0, 3, 4;
  y << 0, 0;
  write_matrix_csv(x, path("x.csv"));
  write_matrix_csv(y, path("y.csv"));
  ASSERT_EQ(run({"sum", "--x", path("x.csv"), "--y", path("y.csv"), "--kernel", "riesz", "--method", "naive", "--out",
                 path("s.txt")})
                .code,
            0);
  EXPECT_DOUBLE_EQ(read_lines(path("s.txt")).at(0), -5.0);
}

TEST_F(CliTest, DatasetRoundTripGivesIdenticalSums) {
  ASSERT_EQ(run({"gen-data", "--n", "200", "--d", "4", "--seed", "9", "--out", path("x.csv")}).code, 0);
  ASSERT_EQ(run({"gen-data", "--n", "150", "--d", "4", "--seed", "10", "--out", path("y.csv")}).code, 0);
  const auto r = run({"sum", "--x", path("x.csv"), "--y", path("y.csv"), "--method", "sorting:sobol", "--kernel",
                      "riesz", "--p", "16", "--out", path("s.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const SummationProblem prob(gaussian_blobs(200, 4, 9), gaussian_blobs(150, 4, 10));
  const Vector ref = sorting_slice_sum(prob, KernelSpec::riesz(1.0, 4), sobol_sphere(16, 4));
  const auto got = read_lines(path("s.txt"));
  ASSERT_EQ(got.size(), 150u);
  for (int i = 0; i < 150; ++i) EXPECT_EQ(got[i], ref(i));
}

TEST_F(CliTest, BenchIsDeterministicApartFromTime) {
  const std::vector<std::string> args = {"bench", "--synthetic", "cube", "--n", "300", "--d", "3", "--methods",
                                         "fourier:iid,fourier:sobol,rff,direct:orthogonal", "--p-list", "8,16",
                                         "--reps", "2", "--seed", "3"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(without_time(a.out), without_time(b.out));
  EXPECT_EQ(a.out.rfind("method,P_or_D,time_s,rel_l1_mean,rel_l1_std,seed\n", 0), 0u);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 1 + 4 * 2);
}

TEST_F(CliTest, BenchSingleRepHasZeroStd) {
  const auto r = run({"bench", "--n", "100", "--methods", "fourier:iid", "--p-list", "8", "--reps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string row = r.out.substr(r.out.find('\n') + 1);
  std::vector<std::string> cols;
  std::stringstream ss(row);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  ASSERT_EQ(cols.size(), 6u);
  EXPECT_EQ(cols[4], "0");
}

TEST_F(CliTest, BenchEqualTimeProfilePairsFeatureCounts) {
  const auto r = run({"bench", "--n", "100", "--methods", "rff,rffk:iid", "--profile", "equal-time", "--p-list", "20",
                      "--reps", "1", "--rffk-k", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\nrff,40,"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\nrffk:iid,10,"), std::string::npos) << r.out;
}

TEST_F(CliTest, VarianceCheckRiesz) {
  const auto r = run({"variance-check", "--kernel", "riesz", "--r", "1", "--d", "3", "--x-norm", "1", "--samples",
                      "200000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string row = r.out.substr(r.out.find('\n') + 1);
  EXPECT_NE(row.find(",0.33333333333333"), std::string::npos) << row;
  const double z = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_LE(std::fabs(z), 4.0);
}

TEST_F(CliTest, RateIidGauss) {
  const auto r = run({"rate", "--kernel", "gauss", "--d", "3", "--generators", "iid", "--p-list", "8,32,128",
                      "--reps", "5", "--n-x", "100", "--detail", path("detail.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string row = r.out.substr(r.out.find('\n') + 1);
  std::vector<std::string> cols;
  std::stringstream ss(row);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  ASSERT_GE(cols.size(), 5u);
  const double rate = std::stod(cols[cols.size() - 2]);
  EXPECT_GE(rate, 0.35);
  EXPECT_LE(rate, 0.65);
  EXPECT_TRUE(fs::exists(path("detail.csv")));
}

TEST_F(CliTest, OutputDirectoryAndStreamFromEnvironment) {
  setenv("QMCSLICE_OUTPUT_DIR", dir_.c_str(), 1);
  ASSERT_EQ(run({"gen-dirs", "--method", "iid", "--d", "3", "--p", "5", "--out", "a.txt"}).code, 0);
  EXPECT_TRUE(fs::exists(path("a.txt")));
  setenv("QMCSLICE_STREAM", "7", 1);
  ASSERT_EQ(run({"gen-dirs", "--method", "iid", "--d", "3", "--p", "5", "--out", "b.txt"}).code, 0);
  ASSERT_EQ(run({"gen-dirs", "--method", "iid", "--d", "3", "--p", "5", "--stream", "0", "--out", "c.txt"}).code, 0);
  EXPECT_NE(load_directions(path("a.txt")).vectors, load_directions(path("b.txt")).vectors);
  EXPECT_EQ(load_directions(path("a.txt")).vectors, load_directions(path("c.txt")).vectors);
  unsetenv("QMCSLICE_OUTPUT_DIR");
  unsetenv("QMCSLICE_STREAM");
}

TEST_F(CliTest, ThreadsDoNotChangeOutput) {
  const std::vector<std::string> base = {"sum", "--n", "400", "--d", "5", "--method", "fourier:iid", "--p", "32"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.txt")});
  b.insert(b.end(), {"--threads", "3", "--out", path("b.txt")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  std::ifstream fa(path("a.txt")), fb(path("b.txt"));
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}
