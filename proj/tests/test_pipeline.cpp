#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "osp/pipeline.hpp"

using namespace osp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json small_config() {
  return json{{"n_dof", 4}, {"budget", 2}, {"n_steps", 500}, {"dt", 0.01}, {"n_samples", 100}, {"seed", 3}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> violations(const json& raw) {
  try {
    validate_config(raw);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
  for (const auto& s : v)
    if (s.find(what) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("osp_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(OSP_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Config, MinimalParses) {
  const auto c = validate_config(small_config());
  EXPECT_EQ(c.n_dof, 4u);
  EXPECT_EQ(c.budget, 2u);
  EXPECT_EQ(c.prior, default_prior());
  EXPECT_TRUE(c.baselines.empty());
}

TEST(Config, MissingDtNamed) {
  auto raw = small_config();
  raw.erase("dt");
  EXPECT_TRUE(mentions(violations(raw), "'dt'"));
}

TEST(Config, BudgetInfeasible) {
  auto raw = small_config();
  raw["budget"] = 5;
  EXPECT_TRUE(mentions(violations(raw), "budget-infeasible"));
}

TEST(Config, AllViolationsCollected) {
  json raw = {{"n_dof", 4},    {"budget", 9},        {"n_steps", -1},
              {"n_samples", 0}, {"seed", "x"},        {"bogus", 1},
              {"baselines", {"greedy", "random"}},   {"solver", {{"tolerance", -1}, {"typo", 1}}},
              {"prior", {{"omega0", {{"dist", "gamma"}, {"mean", 1}, {"std", 1}}}}}};
  const auto v = violations(raw);
  EXPECT_TRUE(mentions(v, "'dt'"));
  EXPECT_TRUE(mentions(v, "budget-infeasible"));
  EXPECT_TRUE(mentions(v, "'n_steps'"));
  EXPECT_TRUE(mentions(v, "'n_samples'"));
  EXPECT_TRUE(mentions(v, "'seed'"));
  EXPECT_TRUE(mentions(v, "unknown key 'bogus'"));
  EXPECT_TRUE(mentions(v, "unknown baseline 'random'"));
  EXPECT_TRUE(mentions(v, "solver.tolerance"));
  EXPECT_TRUE(mentions(v, "unknown key 'typo'"));
  EXPECT_TRUE(mentions(v, "gamma"));
  EXPECT_GE(v.size(), 10u);
}

TEST(Config, CanonicalFiftyStory) {
  const auto c = load_config(std::string(OSP_SOURCE_DIR) + "/configs/fifty_story.json");
  EXPECT_EQ(c.n_dof, 50u);
  EXPECT_EQ(c.budget, 20u);
  EXPECT_EQ(c.n_steps, 1000u);
  EXPECT_EQ(c.n_samples, 1000u);
}

TEST(Config, EchoRoundTrips) {
  auto raw = small_config();
  raw["baselines"] = {"greedy", "low"};
  raw["prior"] = {{"alpha", {{"dist", "lognormal"}, {"mean", 0.2}, {"std", 0.05}}}};
  const auto c = validate_config(raw);
  auto echoed = to_json(c);
  const auto again = validate_config(echoed);
  EXPECT_EQ(to_json(again), echoed);
  EXPECT_EQ(again.prior.alpha.dist, Distribution::lognormal);
}

TEST(Config, UnreadableFile) { EXPECT_THROW(load_config("/nonexistent/osp.json"), ConfigError); }

TEST(Pipeline, SmallRun) {
  auto raw = small_config();
  raw["baselines"] = {"greedy", "exhaustive", "low", "high", "common"};
  const auto rep = run_pipeline(validate_config(raw));
  EXPECT_TRUE(rep.relaxed.converged);
  EXPECT_EQ(rep.placement.delta.sum(), 2.0);
  ASSERT_EQ(rep.comparison.rows.size(), 6u);
  EXPECT_EQ(rep.comparison.rows[0].label, "optimal");
  EXPECT_EQ(rep.comparison.rows[0].bits_gain, 0.0);
  for (const auto& r : rep.comparison.rows) {
    if (r.label == "exhaustive") { EXPECT_NEAR(r.value, rep.placement.objective_binary, 1e-9); }
    EXPECT_GE(r.bits_gain, -1e-9);
  }
  EXPECT_EQ(rep.methods[1].objective_evaluations, 4 + 3);  // greedy
  EXPECT_EQ(rep.methods[2].objective_evaluations, 6);      // exhaustive
  EXPECT_EQ(rep.methods[0].objective_evaluations, rep.placement.objective_evaluations);
}

TEST(Pipeline, FullBudget) {
  auto raw = small_config();
  raw["budget"] = 4;
  const auto rep = run_pipeline(validate_config(raw));
  EXPECT_EQ(rep.placement.delta, Eigen::VectorXd::Ones(4));
  EXPECT_EQ(rep.relaxed.iterations, 0);
}

TEST(Pipeline, StageAttribution) {
  auto raw = small_config();
  raw["prior"] = {{"alpha", {{"dist", "normal"}, {"mean", 1000.0}, {"std", 1.0}}}};
  try {
    run_pipeline(validate_config(raw));
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "sensitivities");
    EXPECT_NE(std::string(e.what()).find("damping ratio"), std::string::npos);
  }
}

TEST(Pipeline, ExhaustiveRefusalIsNoted) {
  json raw = {{"n_dof", 12}, {"budget", 6},      {"n_steps", 200},         {"dt", 0.02},
              {"n_samples", 40}, {"seed", 1},    {"baselines", {"exhaustive"}}, {"exhaustive_cap", 100}};
  const auto rep = run_pipeline(validate_config(raw));
  EXPECT_EQ(rep.comparison.rows.size(), 1u);
  ASSERT_EQ(rep.notes.size(), 1u);
  EXPECT_NE(rep.notes[0].find("924"), std::string::npos);
}

TEST(Pipeline, ReportIsReproducible) {
  auto raw = small_config();
  raw["baselines"] = {"greedy"};
  const auto cfg = validate_config(raw);
  const auto a = scratch("rep_a"), b = scratch("rep_b");
  setenv("OSP_THREADS", "1", 1);
  write_report(run_pipeline(cfg), a);
  setenv("OSP_THREADS", "8", 1);
  write_report(run_pipeline(cfg), b);
  unsetenv("OSP_THREADS");
  for (const char* f : {"report.json", "report.txt", "placement.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_TRUE(fs::exists(a / "timings.json"));
  const auto doc = json::parse(slurp(a / "report.json"));
  EXPECT_EQ(validate_config(doc["config"]).seed, 3u);
  EXPECT_FALSE(doc.contains("timings"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, PlaceWritesReport) {
  const auto dir = scratch("cli_place");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "cfg.json") << small_config().dump();
  }
  const int rc = run_cli("place --config " + (dir / "cfg.json").string() + " --seed 11 --out " +
                             (dir / "out").string() + " --quiet",
                         dir / "log.txt");
  EXPECT_EQ(rc, 0) << slurp(dir / "log.txt");
  const auto doc = json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_EQ(doc["config"]["seed"], 11);
  EXPECT_TRUE(fs::exists(dir / "out" / "placement.csv"));
  fs::remove_all(dir);
}

TEST(Cli, ConfigErrorsAreStaged) {
  const auto dir = scratch("cli_bad");
  fs::create_directories(dir);
  auto raw = small_config();
  raw.erase("dt");
  raw["budget"] = 7;
  {
    std::ofstream(dir / "cfg.json") << raw.dump();
  }
  const int rc = run_cli("place --config " + (dir / "cfg.json").string(), dir / "log.txt");
  EXPECT_NE(rc, 0);
  const auto log = slurp(dir / "log.txt");
  EXPECT_NE(log.find("[config]"), std::string::npos);
  EXPECT_NE(log.find("'dt'"), std::string::npos);
  EXPECT_NE(log.find("budget-infeasible"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, CompareAndOracle) {
  const auto dir = scratch("cli_cmp");
  fs::create_directories(dir);
  {
    auto raw = small_config();
    raw["output_dir"] = (dir / "out").string();
    std::ofstream(dir / "cfg.json") << raw.dump();
  }
  const auto cfg = (dir / "cfg.json").string();
  EXPECT_EQ(run_cli("compare --config " + cfg + " --configs optimal,low,greedy --quiet", dir / "log.txt"), 0)
      << slurp(dir / "log.txt");
  const auto doc = json::parse(slurp(dir / "out" / "comparison.json"));
  EXPECT_EQ(doc["reference"], "optimal");
  EXPECT_EQ(doc["rows"].size(), 3u);

  EXPECT_EQ(run_cli("oracle --config " + cfg + " --exhaustive-cap 100 --quiet", dir / "log.txt"), 0)
      << slurp(dir / "log.txt");
  EXPECT_NE(slurp(dir / "log.txt").find("agree"), std::string::npos);

  const int rc = run_cli("oracle --config " + cfg + " --exhaustive-cap 5 --quiet", dir / "log.txt");
  EXPECT_NE(rc, 0);
  EXPECT_NE(slurp(dir / "log.txt").find("[exhaustive]"), std::string::npos);
  EXPECT_NE(run_cli("compare --config " + cfg + " --configs nonsense --quiet", dir / "log.txt"), 0);
  fs::remove_all(dir);
}
