#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

CliResult run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + CONTAGION_CLI + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("contagion_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  CliResult cli(const std::string& args) { return run(args, dir / "log.txt"); }
  std::string out(const std::string& name) const { return (dir / name).string(); }

  // Small graph, dataset and trained model in dir/<name>.
  void pipeline(const std::string& name, std::uint64_t seed) {
    const auto o = out(name);
    ASSERT_EQ(cli("--seed " + std::to_string(seed) + " -o " + o +
                  " generate --n 120 --mean-degree 8").exit_code, 0);
    ASSERT_EQ(cli("--seed " + std::to_string(seed) + " -o " + o + " simulate --graph " + o +
                  "/graph.edges --covariates " + o + "/covariates.csv --beta1 1").exit_code, 0);
    ASSERT_EQ(cli("--seed " + std::to_string(seed) + " -o " + o + " train --graph " + o +
                  "/graph.edges --dataset " + o + "/dataset.csv --steps 300 --dim 4").exit_code,
              0);
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, DryRunPrintsConfigAndExitsZero) {
  const auto r = cli("--seed 7 -o " + out("never") + " --dry-run experiment --n 300");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("seed=7"), std::string::npos);
  EXPECT_NE(r.output.find("[experiment]"), std::string::npos);
  EXPECT_NE(r.output.find("n=300"), std::string::npos);
  EXPECT_FALSE(fs::exists(out("never")));
}

TEST_F(Cli, ConfigFileRoundTripAndFlagsWin) {
  ASSERT_EQ(cli("--seed 3 -o " + out("a") + " generate --n 50 --blocks 2").exit_code, 0);
  const auto resolved = out("a") + "/resolved_config.toml";
  ASSERT_TRUE(fs::exists(resolved));
  const auto r = cli("--config " + resolved + " -o " + out("b") + " generate --n 60");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(slurp(out("b") + "/resolved_config.toml").find("n=60"), std::string::npos);
  EXPECT_NE(slurp(out("b") + "/resolved_config.toml").find("blocks=2"), std::string::npos);
  EXPECT_NE(slurp(out("b") + "/resolved_config.toml").find("seed=3"), std::string::npos);
}

TEST_F(Cli, UnknownConfigKeyRejected) {
  {
    std::ofstream f(dir / "bad.toml");
    f << "seed=1\n[generate]\nnodes=10\n";
  }
  EXPECT_EQ(cli("--config " + out("bad.toml") + " -o " + out("x") + " generate").exit_code, 1);
}

TEST_F(Cli, MissingOutputDirectoryCreated) {
  const auto nested = out("deep/er/dir");
  ASSERT_EQ(cli("-o " + nested + " generate --n 60").exit_code, 0);
  EXPECT_TRUE(fs::exists(nested + "/graph.edges"));
  EXPECT_TRUE(fs::exists(nested + "/covariates.csv"));
}

TEST_F(Cli, GenerateZeroNodesIsValidationError) {
  EXPECT_EQ(cli("-o " + out("z") + " generate --n 0").exit_code, 1);
}

TEST_F(Cli, TwoBlocksFillTwoLevels) {
  const auto r = cli("-o " + out("g") + " generate --n 100 --blocks 2");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("warning"), std::string::npos);
  std::ifstream in(out("g") + "/covariates.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "node_id,c");
  std::set<std::string> levels;
  while (std::getline(in, line)) levels.insert(line.substr(line.find(',') + 1));
  EXPECT_EQ(levels, (std::set<std::string>{"-1", "1"}));
}

TEST_F(Cli, GenerateIsByteIdenticalForFixedSeed) {
  ASSERT_EQ(cli("--seed 11 -o " + out("a") + " generate --n 200").exit_code, 0);
  ASSERT_EQ(cli("--seed 11 -o " + out("b") + " generate --n 200").exit_code, 0);
  ASSERT_EQ(cli("--seed 12 -o " + out("c") + " generate --n 200").exit_code, 0);
  EXPECT_EQ(slurp(out("a") + "/graph.edges"), slurp(out("b") + "/graph.edges"));
  EXPECT_EQ(slurp(out("a") + "/covariates.csv"), slurp(out("b") + "/covariates.csv"));
  EXPECT_NE(slurp(out("a") + "/graph.edges"), slurp(out("c") + "/graph.edges"));
}

TEST_F(Cli, EstimateRerunIdenticalAndNodesRestrict) {
  pipeline("p", 5);
  const auto p = out("p");
  const std::string base = "-o " + p + "/e1 estimate --graph " + p + "/graph.edges --dataset " +
                           p + "/dataset.csv --params " + p + "/params.txt";
  ASSERT_EQ(cli(base).exit_code, 0);
  ASSERT_EQ(cli("-o " + p + "/e2" + base.substr(base.find(" estimate"))).exit_code, 0);
  const auto first = slurp(p + "/e1/estimates.csv");
  EXPECT_EQ(first, slurp(p + "/e2/estimates.csv"));
  EXPECT_EQ(first.rfind("estimator,confounder_label,beta1,estimate,seed\n", 0), 0u);
  EXPECT_NE(first.find("embedding,"), std::string::npos);
  EXPECT_NE(first.find("unadjusted,"), std::string::npos);
  EXPECT_NE(first.find("parametric,"), std::string::npos);

  {
    std::ofstream f(p + "/nodes.txt");
    for (int i = 0; i < 60; ++i) f << i << '\n';
  }
  ASSERT_EQ(cli("-o " + p + "/e3" + base.substr(base.find(" estimate")) + " --nodes " + p +
                "/nodes.txt").exit_code, 0);
  EXPECT_NE(slurp(p + "/e3/estimates.csv"), first);
}

TEST_F(Cli, EstimateRejectsMismatchedParams) {
  pipeline("p", 5);
  ASSERT_EQ(cli("-o " + out("q") + " generate --n 90").exit_code, 0);
  const auto p = out("p");
  const auto r = cli("-o " + p + "/bad estimate --graph " + out("q") + "/graph.edges --dataset " +
                     p + "/dataset.csv --params " + p + "/params.txt");
  EXPECT_NE(r.exit_code, 0);
}

TEST_F(Cli, VaccinationWritesEvaluationNodes) {
  ASSERT_EQ(cli("-o " + out("v") + " generate --n 100").exit_code, 0);
  const auto v = out("v");
  ASSERT_EQ(cli("-o " + v + " simulate --design vaccination --graph " + v +
                "/graph.edges --covariates " + v + "/covariates.csv").exit_code, 0);
  EXPECT_TRUE(fs::exists(v + "/evaluation_nodes.txt"));
}

TEST_F(Cli, SmokeGridUnderOneMinute) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = cli("-o " + out("s") + " experiment --n 300 --n-seeds 2 --steps 200");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_LT(secs, 60.0);
  EXPECT_TRUE(fs::exists(out("s") + "/bias_table.md"));
  EXPECT_TRUE(fs::exists(out("s") + "/bias_table.csv"));
  EXPECT_TRUE(fs::exists(out("s") + "/resolved_config.toml"));
}

TEST_F(Cli, BadArgumentsExitOne) {
  EXPECT_EQ(cli("").exit_code, 1);
  EXPECT_EQ(cli("generate --bogus").exit_code, 1);
  EXPECT_EQ(cli("-o " + out("x") + " simulate --graph /nonexistent --covariates /nonexistent")
                .exit_code,
            2);
}
