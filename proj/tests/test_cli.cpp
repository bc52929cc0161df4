#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dme/cli.hpp"

using namespace dme;
namespace fs = std::filesystem;

namespace {

cli::RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "dme_sim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::parse_config(static_cast<int>(argv.size()), argv.data());
}

struct Result {
  int code;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dme_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the binary with DME_CACHE_DIR pointing into the test directory.
  Result sim(const std::string& args) {
    const std::string cmd =
        "DME_CACHE_DIR='" + dir_.string() + "' '" + DME_SIM_PATH + "' " + args + " 2>'" + (dir_ / "err").string() + "'";
    FILE* p = ::popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
    const int status = ::pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
  }

  std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

}  // namespace

TEST(Parse, DefaultsAndSchemeList) {
  const auto c = parse({"mse"});
  EXPECT_EQ(c.schemes, cli::default_schemes("mse"));
  EXPECT_EQ(c.n, 4u);
  const auto t = parse({"power", "--scheme", "rand_k,rps_avg", "--n", "10", "--k", "6"});
  EXPECT_EQ(t.schemes, (std::vector<std::string>{"rand_k", "rps_avg"}));
  EXPECT_EQ(t.n, 10u);
}

TEST(Parse, UsageErrors) {
  EXPECT_THROW(parse({"mse", "--scheme", "bogus"}), cli::UsageError);
  EXPECT_THROW(parse({"mse", "--k", "80"}), cli::UsageError);
  EXPECT_THROW(parse({"mse", "--d", "48", "--scheme", "rps_max"}), cli::UsageError);
  EXPECT_NO_THROW(parse({"mse", "--d", "48", "--scheme", "rand_k_spatial_max"}));
  EXPECT_THROW(parse({"rank", "--d", "48"}), cli::UsageError);
  EXPECT_THROW(parse({"limit", "--n", "4", "--k", "4", "--d", "64"}), cli::UsageError);
  EXPECT_THROW(parse({"mse", "--output", "/nonexistent_dir_xyz/out.csv"}), cli::UsageError);
  EXPECT_THROW(parse({"mse", "--scheme", "rps_opt", "--n", "4", "--R", "3.5"}), cli::UsageError);
  EXPECT_THROW(parse({"mse", "--n", "abc"}), CLI::ParseError);
  EXPECT_THROW(parse({"mse", "--unknown", "1"}), CLI::ParseError);
  EXPECT_THROW(parse({"frobnicate"}), CLI::ParseError);
  EXPECT_THROW(parse({"calibrate", "--beta-trials", "50"}), CLI::ParseError);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(sim("").code, 2);
  EXPECT_EQ(sim("--help").code, 0);
  EXPECT_EQ(sim("mse --n x").code, 2);
  EXPECT_EQ(sim("mse --nope 3").code, 2);
  write("bad.idx", "not an idx file");
  EXPECT_EQ(sim("power --dataset '" + (dir_ / "bad.idx").string() + "'").code, 1);
  EXPECT_NE(read(dir_ / "err").find("bad magic"), std::string::npos);
  EXPECT_EQ(sim("mse --dataset /no/such/file").code, 2);
}

TEST_F(Cli, ConfigFileWithFlagPrecedence) {
  const auto cfg = write("run.ini", "# rank run\nn = 3\nk = 8\nd = 32\ntrials = 50\n");
  const auto r = sim("rank --config '" + cfg.string() + "' --k 4");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "n,d,k,rank,count,fraction");
  EXPECT_EQ(row.substr(0, 7), "3,32,4,");
  EXPECT_EQ(sim("rank --config '" + write("bad.ini", "bogus_key = 1\n").string() + "'").code, 2);
  EXPECT_EQ(sim("rank --config '" + write("bad2.ini", "n = many\n").string() + "'").code, 2);
}

TEST_F(Cli, MseOutputIsReproducible) {
  const std::string args = "mse --scheme rand_k,rps_max --n 4 --d 16 --k 2 --R 1 --trials 200 --beta-trials 200";
  const auto a = dir_ / "a.csv", b = dir_ / "b.csv";
  ASSERT_EQ(sim(args + " --output '" + a.string() + "' --workers 1").code, 0);
  ASSERT_EQ(sim(args + " --output '" + b.string() + "' --workers 3").code, 0);
  const auto text = read(a);
  EXPECT_EQ(text, read(b));
  EXPECT_EQ(text.substr(0, text.find('\n')), "scheme,R,n,d,k,mse_mean,mse_std,trials,realized_R,beta_bar");
  EXPECT_NE(text.find("\nrps_max,1,4,16,2,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "beta_cache.tsv"));
}

TEST_F(Cli, CalibrateWritesAndReusesCache) {
  const std::string args = "calibrate --scheme rps_avg,rand_k --n 4 --d 16 --k 2 --beta-trials 200";
  const auto first = sim(args);
  ASSERT_EQ(first.code, 0);
  EXPECT_EQ(first.out.substr(0, first.out.find('\n')), "scheme,n,d,k,transform,R,trials,beta_bar");
  EXPECT_NE(first.out.find("rps_avg,4,16,2,avg,,200,"), std::string::npos);
  EXPECT_EQ(first.out.find("\nrand_k,"), std::string::npos);
  const auto cache = read(dir_ / "beta_cache.tsv");
  EXPECT_EQ(cache.rfind("rps_avg\t4\t16\t2\tavg\t\t0\t200\t", 0), 0u);
  // a larger cached run satisfies a smaller request
  ASSERT_EQ(sim("calibrate --scheme rps_avg --n 4 --d 16 --k 2 --beta-trials 400").code, 0);
  const auto again = sim("calibrate --scheme rps_avg --n 4 --d 16 --k 2 --beta-trials 300");
  EXPECT_NE(again.out.find("rps_avg,4,16,2,avg,,400,"), std::string::npos);
}

TEST_F(Cli, TaskOnCsvDataset) {
  std::string text = "a,b,c,y\n";
  for (int i = 0; i < 40; ++i) {
    const double a = i % 7, b = (i * 3) % 5, c = (i * i) % 11;
    text += std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "," +
            std::to_string(0.5 * a - b + 0.1 * c) + "\n";
  }
  const auto data = write("reg.csv", text);
  const auto part = dir_ / "part.txt";
  const auto r = sim("linreg --dataset '" + data.string() + "' --scheme rand_k --n 4 --k 3 --rounds 5 --lr 0.01" +
                     " --partition-out '" + part.string() + "'");
  ASSERT_EQ(r.code, 0) << read(dir_ / "err");
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "round,scheme,est_sq_error,task_loss");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 5u);
  EXPECT_EQ(read_partition(part).num_clients(), 4u);
}

TEST_F(Cli, SyntheticTaskSummaries) {
  const auto out = dir_ / "k.csv";
  const auto r = sim("kmeans --synthetic blobs --samples 200 --d 8 --n 4 --k 8 --clusters 3 --rounds 4 --scheme rand_k"
                     " --repetitions 2 --output '" + out.string() + "'");
  ASSERT_EQ(r.code, 0) << read(dir_ / "err");
  EXPECT_NE(r.out.find("rand_k: cumulative est error"), std::string::npos);
  const auto csv = read(out);
  EXPECT_NE(csv.find("\n3,rand_k,"), std::string::npos);
}
