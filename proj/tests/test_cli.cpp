#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "bowl/csv.hpp"
#include "bowl/sim.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string output;
};

Outcome bowl_run(const std::string& args) {
  const std::string cmd = std::string(BOWL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int st = pclose(pipe);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> data_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);)
    if (!l.empty() && l[0] != '#') lines.push_back(l);
  return lines;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bowl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_dataset(const std::string& name, int n, bool drop_reward = false) {
    bowl::ScenarioSpec spec;
    bowl::Rng rng(3);
    const auto g = bowl::generate_scenario(spec, n, rng);
    std::ostringstream os;
    for (int j = 0; j < bowl::kScenarioFeatures; ++j) os << "x" << j + 1 << ",";
    os << (drop_reward ? "a" : "a,r") << "\n";
    for (Eigen::Index i = 0; i < g.data.n(); ++i) {
      for (int j = 0; j < bowl::kScenarioFeatures; ++j) os << bowl::csv::format_real(g.data.features(i, j)) << ",";
      os << g.data.actions[i];
      if (!drop_reward) os << "," << bowl::csv::format_real(g.data.rewards[i]);
      os << "\n";
    }
    const fs::path p = dir_ / name;
    std::ofstream(p) << os.str();
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FitWritesRetainedDraws) {
  const fs::path data = write_dataset("d.csv", 100);
  const Outcome r = bowl_run("fit --data " + data.string() + " --prior ep --seed 7 --out-dir " + (dir_ / "f").string());
  ASSERT_EQ(r.status, 0) << r.output;
  const auto lines = data_lines(dir_ / "f" / "draws.csv");
  ASSERT_EQ(lines.size(), 351u);
  EXPECT_EQ(lines[0].rfind("chain,draw,intercept,x1,", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "f" / "summary.json"));
  EXPECT_NE(slurp(dir_ / "f" / "draws.csv").find("# seed = 7"), std::string::npos);
}

TEST_F(Cli, MissingRewardColumnIsInputError) {
  const fs::path data = write_dataset("d.csv", 20, true);
  const Outcome r = bowl_run("fit --data " + data.string() + " --out-dir " + dir_.string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("'r'"), std::string::npos) << r.output;
}

TEST_F(Cli, UnknownPriorAndMissingFileAreInputErrors) {
  const fs::path data = write_dataset("d.csv", 20);
  EXPECT_EQ(bowl_run("fit --data " + data.string() + " --prior lasso --out-dir " + dir_.string()).status, 2);
  EXPECT_EQ(bowl_run("fit --data " + (dir_ / "nope.csv").string()).status, 2);
  EXPECT_EQ(bowl_run("frobnicate").status, 2);
  EXPECT_EQ(bowl_run("--help").status, 0);
}

TEST_F(Cli, ChainsDifferButRerunsMatch) {
  const fs::path data = write_dataset("d.csv", 60);
  const std::string base = "fit --data " + data.string() + " --chains 2 --draws 80 --burn-in 20 --seed 11 ";
  ASSERT_EQ(bowl_run(base + "--jobs 1 --out-dir " + (dir_ / "a").string()).status, 0);
  ASSERT_EQ(bowl_run(base + "--jobs 2 --out-dir " + (dir_ / "b").string()).status, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "draws.csv"), slurp(dir_ / "b" / "draws.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json"));

  const auto lines = data_lines(dir_ / "a" / "draws.csv");
  ASSERT_EQ(lines.size(), 1u + 2u * 60u);
  // Same draw index in the two chains, coefficient columns only.
  const auto coeffs = [](const std::string& l) { return l.substr(l.find(',', l.find(',') + 1)); };
  EXPECT_NE(coeffs(lines[1]), coeffs(lines[61]));
  EXPECT_EQ(lines[61].rfind("1,0,", 0), 0u);
}

TEST_F(Cli, PredictGridAndQuery) {
  const fs::path data = write_dataset("d.csv", 100);
  ASSERT_EQ(bowl_run("fit --data " + data.string() + " --out-dir " + dir_.string()).status, 0);
  const std::string draws = (dir_ / "draws.csv").string();

  ASSERT_EQ(bowl_run("predict --draws " + draws + " --grid --out-dir " + dir_.string()).status, 0);
  const auto grid = data_lines(dir_ / "grid.csv");
  ASSERT_EQ(grid.size(), 1u + 1089u);
  EXPECT_EQ(grid[0], "x1,x2,prob_plus,action,certainty");

  std::ofstream(dir_ / "q.csv") << "x1,x2,x3,x4,x5,x6,x7,x8,x9,x10\n0.5,0.5,0,0,0,0,0,0,0,0\n";
  const Outcome r = bowl_run("predict --draws " + draws + " --query " + (dir_ / "q.csv").string() + " --out-dir " +
                         dir_.string());
  ASSERT_EQ(r.status, 0) << r.output;
  const auto rec = data_lines(dir_ / "recommendations.csv");
  ASSERT_EQ(rec.size(), 2u);
  const double certainty = std::stod(rec[1].substr(rec[1].rfind(',') + 1));
  EXPECT_GE(certainty, 0.5);
  EXPECT_LE(certainty, 1.0);
}

TEST_F(Cli, PredictRejectsEmptyDraws) {
  std::ofstream(dir_ / "empty.csv") << "chain,draw,intercept,x1,x2\n";
  EXPECT_EQ(bowl_run("predict --draws " + (dir_ / "empty.csv").string() + " --grid --out-dir " + dir_.string()).status,
            2);
}

TEST_F(Cli, ReproduceIsByteIdentical) {
  const std::string base =
      "reproduce --scenario 1 --n 40 --reps 2 --n-test 100 --draws 60 --burn-in 20 --owl-epochs 20 "
      "--heatmap-n 60 --grid-res 5 --seed 3 ";
  ASSERT_EQ(bowl_run(base + "--jobs 1 --out-dir " + (dir_ / "a").string()).status, 0);
  ASSERT_EQ(bowl_run(base + "--jobs 3 --out-dir " + (dir_ / "b").string()).status, 0);
  for (const char* f : {"tables.csv", "raw_rates.csv", "heatmap.csv", "coefficient_magnitudes.csv"}) {
    const std::string a = slurp(dir_ / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(data_lines(dir_ / "a" / "heatmap.csv").size(), 1u + 25u);
}

TEST_F(Cli, ReproduceRejectsZeroReps) {
  EXPECT_EQ(bowl_run("reproduce --reps 0 --out-dir " + dir_.string()).status, 2);
}

TEST_F(Cli, VerifyExitCodes) {
  const Outcome ok = bowl_run("verify --quick");
  EXPECT_EQ(ok.status, 0) << ok.output;
  EXPECT_NE(ok.output.find("PASS"), std::string::npos);
  const Outcome bad = bowl_run("verify --quick --tol 1e-12");
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.output.find("FAIL"), std::string::npos);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  const fs::path data = write_dataset("d.csv", 50);
  std::ofstream(dir_ / "run.toml") << "[fit]\ndraws = 40\nburn-in = 10\nprior = \"normal\"\n";
  const std::string base = "fit --config " + (dir_ / "run.toml").string() + " --data " + data.string();
  ASSERT_EQ(bowl_run(base + " --out-dir " + (dir_ / "c").string()).status, 0);
  EXPECT_EQ(data_lines(dir_ / "c" / "draws.csv").size(), 1u + 30u);
  EXPECT_NE(slurp(dir_ / "c" / "draws.csv").find("# prior = normal"), std::string::npos);
  ASSERT_EQ(bowl_run(base + " --draws 50 --out-dir " + (dir_ / "d").string()).status, 0);
  EXPECT_EQ(data_lines(dir_ / "d" / "draws.csv").size(), 1u + 40u);
}
