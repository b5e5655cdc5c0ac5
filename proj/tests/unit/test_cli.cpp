#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "slatesim/cli.hpp"
#include "slatesim/experiment.hpp"
#include "slatesim/knapsack.hpp"

namespace slatesim {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("slatesim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream cfg(path("tiny.cfg"));
    cfg << "num_items: 200\nnum_users: 8\nusers_per_iteration: 4\niterations: 2\n"
           "slate_size: 5\ntop_m: 6\nrandom_r: 2\ngbrt_rounds: 5\neval_episodes: 20\n"
           "diagnostic_eval_episodes: 0\nalgorithms: [\"SARSA\", \"QLearning\"]\n"
           "discount_factor: [0.2, 0.8]\nuser_budget: [100]\nseeds: [0, 1]\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, MissingSubcommandIsUsageError) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
}

TEST_F(CliTest, HelpSucceeds) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("sweep"), std::string::npos);
}

TEST_F(CliTest, OracleSolvesInstance) {
  {
    std::ofstream f(path("inst.json"));
    f << to_json(KnapsackInstance{{0.5, 0.4, 0.3}, {4, 3, 5}, 7}).dump();
  }
  const auto r = run({"oracle", "--instance", path("inst.json"), "--out", path("sol.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out, "S={0,1}, utility 0.9, cost 7\n");
  const auto sol = knapsack_solution_from_json(nlohmann::json::parse(slurp(path("sol.json"))));
  EXPECT_EQ(sol.selected, (std::vector<std::size_t>{0, 1}));
}

TEST_F(CliTest, OracleMalformedInstanceIsRuntimeFailure) {
  {
    std::ofstream f(path("bad.json"));
    f << "{\"utilities\": [0.5], \"costs\": [1, 2], \"budget\": 3}";
  }
  const auto r = run({"oracle", "--instance", path("bad.json")});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"oracle", "--instance", path("absent.json")}).code, cli::kExitUsage);
}

TEST_F(CliTest, BadConfigValueNamesKey) {
  const auto r = run({"gen-catalog", "--out", path("c.csv"), "--epsilon", "1.5"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("epsilon"), std::string::npos);
}

TEST_F(CliTest, BadConfigFileIsUsageError) {
  {
    std::ofstream f(path("bad.cfg"));
    f << "slate_size: 0\n";
  }
  const auto r = run({"gen-catalog", "--out", path("c.csv"), "--config", path("bad.cfg")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("slate_size"), std::string::npos);
}

TEST_F(CliTest, GenCatalogIsSeeded) {
  ASSERT_EQ(run({"gen-catalog", "--num_items", "50", "--seed", "3", "--out", path("a.csv")}).code, 0);
  ASSERT_EQ(run({"gen-catalog", "--num_items", "50", "--seed", "3", "--out", path("b.csv")}).code, 0);
  ASSERT_EQ(run({"gen-catalog", "--num_items", "50", "--seed", "4", "--out", path("c.csv")}).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(CliTest, TrainWritesModelAndDiagnostics) {
  const auto r = run({"train", "--config", path("tiny.cfg"), "--out", path("model.json"),
                      "--algorithm", "SARSA", "--gamma", "0.5"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "iteration,mean_target,td_mse,eval_play_rate");
  EXPECT_TRUE(fs::exists(path("model.json")));
  EXPECT_EQ(run({"train", "--config", path("tiny.cfg"), "--out", path("m2.json"), "--algorithm",
                 "Bogus"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, SweepIsDeterministicAndReportable) {
  for (const char* name : {"r1.csv", "r2.csv"}) {
    const auto r = run({"sweep", "--config", path("tiny.cfg"), "--workers", "2", "--out", path(name),
                        "--episodes-dir", path("episodes")});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  }
  const std::string a = slurp(path("r1.csv"));
  EXPECT_EQ(a, slurp(path("r2.csv")));
  std::istringstream in(a);
  EXPECT_EQ(read_results_csv(in).rows.size(), 3u * 2u * 1u * 2u);
  EXPECT_TRUE(fs::exists(path("episodes/QLearning_g0.8_b100_s1.jsonl")));

  const auto rep = run({"report", "--results", path("r1.csv")});
  ASSERT_EQ(rep.code, cli::kExitOk) << rep.err;
  EXPECT_EQ(rep.out.substr(0, rep.out.find('\n')),
            "algorithm,budget_loc,metric,pairs,delta,ci_lower,ci_upper,sign_p");
  EXPECT_EQ(run({"report", "--results", path("r1.csv"), "--gamma-a", "0.3"}).code,
            cli::kExitFailure);
}

}  // namespace
}  // namespace slatesim
