#include "cml_tools/runner.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace cml::tools;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cml_runner_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CMLBENCH_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Schema, RecipeCatalog) {
  const std::vector<std::string> expected{
      "sync-n2",       "desync-lemma5",     "roundoff-sync",           "soft-decay",
      "circle-shrink", "ly-tripling",       "perturb-sharpness",       "tau-composed-convergence",
      "meanfield-lebesgue", "meanfield-orbit", "diag-lemma",           "G-contraction"};
  EXPECT_EQ(recipe_names(), expected);
  for (const auto& name : expected) EXPECT_NO_THROW(resolve_config(recipe_config(name))) << name;
}

TEST(Schema, UnknownFieldsCarryPaths) {
  try {
    resolve_config({{"kind", "ulam"}, {"params", {{"binz", 4}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("params.binz", 0), 0u);
  }
  EXPECT_THROW(resolve_config({{"kind", "nope"}}), ConfigError);
  EXPECT_THROW(resolve_config({{"kind", "ulam"}, {"extra", 1}}), ConfigError);
  EXPECT_THROW(resolve_config({{"kind", "ulam"}, {"params", {{"bins", "four"}}}}), ConfigError);
  EXPECT_THROW(resolve_config({{"kind", "ulam"}, {"seed", -1}}), ConfigError);
}

TEST(Schema, DefaultsFilled) {
  auto r = resolve_config({{"kind", "ly_check"}});
  EXPECT_EQ(r["params"]["bins"], 243);
  EXPECT_EQ(r["format"], "csv");
  EXPECT_EQ(r["seed"], 1);
}

TEST(Runner, BadParamValueIsConfigError) {
  auto dir = scratch("badvalue");
  Invocation inv;
  inv.config = {{"kind", "lemma5"}, {"params", {{"a0", "1/1000"}}}};
  inv.out_dir = dir;
  std::ostringstream log;
  EXPECT_EQ(run_experiment(inv, log), kBadConfig);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Runner, ArtifactsEmbedHeader) {
  auto dir = scratch("header");
  Invocation inv;
  inv.config = recipe_config("desync-lemma5");
  inv.out_dir = dir;
  std::ostringstream log;
  ASSERT_EQ(run_experiment(inv, log), kOk) << log.str();
  auto summary = json::parse(slurp(dir / "lemma5_summary.json"));
  EXPECT_EQ(summary["summary"]["stays_in_A"], true);
  EXPECT_EQ(summary["header"]["tool"], kToolName);
  EXPECT_EQ(summary["header"]["version"], kToolVersion);
  EXPECT_EQ(summary["header"]["config"]["params"]["steps"], 10000);
  const auto csv = slurp(dir / "lemma5_trajectory.csv");
  EXPECT_EQ(csv.rfind("# tool=cmlbench", 0), 0u);
  EXPECT_NE(csv.find("t,a,b,in_A\n"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Runner, CertificationFailureExitsOne) {
  auto dir = scratch("fail");
  Invocation inv;
  // a single random start never stays synced within 3 steps
  inv.config = {{"kind", "ensemble"},
                {"params", {{"trials", 3}, {"horizon", 3}, {"require_sync", true}, {"arithmetic", "rational"}}}};
  inv.out_dir = dir;
  std::ostringstream log;
  EXPECT_EQ(run_experiment(inv, log), kCertificationFailed);
  fs::remove_all(dir);
}

TEST(Runner, ByteIdenticalAcrossThreadCounts) {
  auto config = recipe_config("sync-n2");
  config["params"]["trials"] = 60;
  std::string first;
  for (unsigned threads : {1u, 3u, 8u}) {
    auto dir = scratch("threads" + std::to_string(threads));
    Invocation inv;
    inv.config = config;
    inv.out_dir = dir;
    inv.threads = threads;
    std::ostringstream log;
    ASSERT_EQ(run_experiment(inv, log), kOk) << log.str();
    auto both = slurp(dir / "ensemble_summary.json") + slurp(dir / "ensemble_trials.csv");
    if (first.empty()) {
      first = both;
    } else {
      EXPECT_EQ(both, first) << threads;
    }
    fs::remove_all(dir);
  }
}

TEST(Runner, JsonSeriesFormat) {
  auto dir = scratch("jsonfmt");
  Invocation inv;
  inv.config = {{"kind", "ulam"}, {"format", "json"}, {"params", {{"density", {4, 0, 0, 0}}}}};
  inv.out_dir = dir;
  std::ostringstream log;
  ASSERT_EQ(run_experiment(inv, log), kOk);
  auto doc = json::parse(slurp(dir / "ulam_matrix.json"));
  EXPECT_EQ(doc["columns"].size(), 4u);
  auto summary = json::parse(slurp(dir / "ulam_summary.json"));
  EXPECT_EQ(summary["summary"]["pushed"], json::array({2.0, 2.0, 0.0, 0.0}));
  fs::remove_all(dir);
}

TEST(Cli, MalformedConfigExitsTwoWithoutArtifacts) {
  auto dir = scratch("cli_bad");
  auto cfg = fs::temp_directory_path() / "cml_runner_test_bad.json";
  {
    std::ofstream out(cfg);
    out << "{\"kind\": \"ulam\", \"params\": {\"bins\": ";
  }
  EXPECT_EQ(cli("ulam --config " + cfg.string() + " --out " + dir.string()), 2);
  EXPECT_FALSE(fs::exists(dir));
  {
    std::ofstream out(cfg);
    out << R"({"kind": "ulam", "params": {"map": "nonexistent"}})";
  }
  EXPECT_EQ(cli("ulam --config " + cfg.string() + " --out " + dir.string()), 2);
  EXPECT_FALSE(fs::exists(dir));
  EXPECT_EQ(cli("ulam --format xml --out " + dir.string()), 2);
  EXPECT_FALSE(fs::exists(dir));
  fs::remove(cfg);
}

TEST(Cli, RecipeRuns) {
  auto dir = scratch("cli_recipe");
  EXPECT_EQ(cli("recipe perturb-sharpness --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "perturb_check_summary.json"));
  EXPECT_EQ(cli("recipe no-such-recipe"), 2);
  fs::remove_all(dir);
}
