#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fda_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int exec(const std::string& args) {
    const std::string cmd = std::string(FDA_CLI_PATH) + " " + args + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" + (dir_ / "stderr.txt").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string read(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  fs::path write_config(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static long lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

  fs::path dir_;
};

TEST_F(Cli, RunWritesReferenceScenario) {
  ASSERT_EQ(exec("run --model fda --seed 3 --dump-trajectories --out " + (dir_ / "r").string()), 0);
  EXPECT_EQ(lines(read(dir_ / "r/metrics.csv")), 1252);  // header + 1251 rows
  EXPECT_TRUE(fs::exists(dir_ / "r/trajectories.csv"));
  const auto summary = nlohmann::json::parse(read(dir_ / "r/summary.json"));
  EXPECT_EQ(summary["steps_completed"], 1250);
  const auto manifest = nlohmann::json::parse(read(dir_ / "r/manifest.json"));
  for (const auto& f : manifest["files"]) EXPECT_TRUE(fs::exists(dir_ / "r" / f.get<std::string>()));
  EXPECT_EQ(manifest["seeds"][0], 3);
}

TEST_F(Cli, ThetaZeroFdaMatchesReactiveByteForByte) {
  const auto cfg = write_config("theta0.ini", "[model]\ntheta = 0\n");
  for (const std::string mode : {"nominal", "perturbed"}) {
    ASSERT_EQ(exec("run --config " + cfg.string() + " --model fda --mode " + mode + " --seed 8 --out " +
                   (dir_ / ("f" + mode)).string()), 0);
    ASSERT_EQ(exec("run --config " + cfg.string() + " --model reactive --mode " + mode + " --seed 8 --out " +
                   (dir_ / ("r" + mode)).string()), 0);
    EXPECT_EQ(read(dir_ / ("f" + mode) / "metrics.csv"), read(dir_ / ("r" + mode) / "metrics.csv"));
  }
}

TEST_F(Cli, RunIsReproducible) {
  ASSERT_EQ(exec("run --mode perturbed --seed 4 --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(exec("run --mode perturbed --seed 4 --out " + (dir_ / "b").string()), 0);
  EXPECT_EQ(read(dir_ / "a/metrics.csv"), read(dir_ / "b/metrics.csv"));
  EXPECT_EQ(read(dir_ / "a/config.ini"), read(dir_ / "b/config.ini"));
}

TEST_F(Cli, MalformedConfigFails) {
  const auto cfg = write_config("bad.ini", "[model]\ntheta = 1.5\n");
  EXPECT_EQ(exec("run --config " + cfg.string() + " --out " + (dir_ / "x").string()), 1);
  const auto err = read(dir_ / "stderr.txt");
  EXPECT_NE(err.find("theta"), std::string::npos);
  EXPECT_NE(err.find("[0,1]"), std::string::npos);
}

TEST_F(Cli, UnknownFlagAndMissingConfig) {
  EXPECT_EQ(exec("run --bogus"), 1);
  EXPECT_EQ(exec("run --config " + (dir_ / "nope.ini").string() + " --out " + (dir_ / "x").string()), 3);
}

TEST_F(Cli, UnwritableOutputIsIoError) {
  std::ofstream(dir_ / "file") << "x";
  EXPECT_EQ(exec("run --out " + (dir_ / "file" / "sub").string()), 3);
}

TEST_F(Cli, DegeneracyExitCode) {
  // Perfect overlap at start is impossible from the sampler; shrink the box
  // so it cannot draw a collision-free configuration.
  EXPECT_EQ(exec("run --set init.pos_high=1e-300 --out " + (dir_ / "d").string()), 2);
}

TEST_F(Cli, CompareIsDeterministic) {
  const std::string args = "compare --seeds 1 --seed 12 --set run.T=2 --out ";
  ASSERT_EQ(exec(args + (dir_ / "c1").string()), 0);
  ASSERT_EQ(exec(args + (dir_ / "c2").string()), 0);
  for (const char* f : {"compare_runs.csv", "compare_summary.csv", "compare_timeseries.csv", "summary.json"})
    EXPECT_EQ(read(dir_ / "c1" / f), read(dir_ / "c2" / f)) << f;
  EXPECT_EQ(lines(read(dir_ / "c1/compare_runs.csv")), 5);
  EXPECT_EQ(lines(read(dir_ / "c1/compare_summary.csv")), 5);
}

TEST_F(Cli, SweepRowsPerMode) {
  ASSERT_EQ(exec("sweep --param theta --values 0,0.4,0.8 --seeds 5 --set run.T=1 --out " +
                 (dir_ / "s").string()), 0);
  const auto csv = read(dir_ / "s/sweep.csv");
  EXPECT_EQ(lines(csv), 31);
  std::istringstream in(csv);
  std::string line;
  int nominal = 0, perturbed = 0;
  while (std::getline(in, line)) {
    if (line.find(",nominal,") != std::string::npos) ++nominal;
    if (line.find(",perturbed,") != std::string::npos) ++perturbed;
  }
  EXPECT_EQ(nominal, 15);
  EXPECT_EQ(perturbed, 15);
}

TEST_F(Cli, SweepValidation) {
  EXPECT_EQ(exec("sweep --param theta --values \"\" --out " + (dir_ / "s").string()), 1);
  EXPECT_EQ(exec("analyze --graph complete:3 --theta \"\" --out " + (dir_ / "a").string()), 1);
  EXPECT_EQ(exec("sweep --param bogus --values 1 --out " + (dir_ / "s").string()), 1);
}

TEST_F(Cli, AnalyzeTwoAgentGraph) {
  ASSERT_EQ(exec("analyze --graph complete:2 --phi 1 --tph 1 --theta 0,0.8 --out " + (dir_ / "a").string()), 0);
  std::istringstream in(read(dir_ / "a/spectral_report.csv"));
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(header.rfind("theta,t_ph,phi,status,n,components,zero_mode", 0), 0u) << header;
  auto field = [](const std::string& row, int idx) {
    std::istringstream r(row);
    std::string f;
    for (int k = 0; k <= idx; ++k) std::getline(r, f, ',');
    return f;
  };
  EXPECT_NEAR(std::stod(field(row0, 7)), -2.0, 1e-9);
  EXPECT_NEAR(std::stod(field(row1, 7)), -10.0, 1e-9);
  EXPECT_EQ(field(row0, 10), "true");
  EXPECT_TRUE(fs::exists(dir_ / "a/spectrum.csv"));
}

TEST_F(Cli, AnalyzeDisconnectedGraph) {
  ASSERT_EQ(exec("analyze --graph edges:4:0-1,2-3 --phi 1 --theta 0 --out " + (dir_ / "a").string()), 0);
  const auto csv = read(dir_ / "a/spectral_report.csv");
  EXPECT_NE(csv.find("0,1,1,ok,4,2,2,"), std::string::npos) << csv;
  EXPECT_NE(csv.find(",false,false"), std::string::npos);
}

TEST_F(Cli, AnalyzeSingularRowIsFlagged) {
  ASSERT_EQ(exec("analyze --graph complete:3 --phi 1 --theta 1 --tph 1 --out " + (dir_ / "a").string()), 0);
  EXPECT_NE(read(dir_ / "a/spectral_report.csv").find(",singular,"), std::string::npos);
}

TEST_F(Cli, AnalyzeSimulatedConfiguration) {
  ASSERT_EQ(exec("analyze --seed 5 --at-time 10 --theta 0,0.8 --out " + (dir_ / "a").string()), 0);
  EXPECT_EQ(lines(read(dir_ / "a/spectral_report.csv")), 3);
}

}  // namespace
