#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

#include "gbe/oracle.hpp"
#include "gbe/problems.hpp"
#include "gbe_app/commands.hpp"
#include "gbe_app/config.hpp"

namespace gbe::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gbe_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json manifest_of(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

TEST(ParseConfig, BuiltinSqrtIsValid) {
  const RunConfig c = parse_config(json::parse(R"({"problem": {"builtin": "sqrt", "horizon": 10}, "method": "gbe"})"));
  EXPECT_EQ(c.problem, "sqrt");
  EXPECT_EQ(c.horizon, 10);
  EXPECT_EQ(c.method, Method::kGbe);
}

TEST(ParseConfig, BellmanWithMaxFamilyIsIncompatible) {
  const json doc = json::parse(R"({"problem": "fthmis", "method": "bellman"})");
  try {
    parse_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("max"), std::string::npos);
  }
}

TEST(ParseConfig, DubinsHalfScaleDerivesThirtyCubed) {
  const RunConfig c = parse_config(json::parse(R"({"problem": {"builtin": "dubins", "grid_scale": 0.5}})"));
  EXPECT_EQ(derived_grid(c), (std::vector<int>{30, 30, 30}));
}

TEST(ParseConfig, UnknownKeysAreNamed) {
  try {
    parse_config(json::parse(R"({"problem": "sqrt", "methd": "gbe"})"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("methd"), std::string::npos);
  }
  try {
    parse_config(json::parse(R"({"problem": {"builtin": "sqrt", "grid_scale": 0.5}})"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("grid_scale"), std::string::npos);
  }
}

TEST(ParseConfig, MethodRequirements) {
  EXPECT_THROW(parse_config(json::parse(R"({"problem": "fthmis", "method": "augment"})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"problem": "dubins", "method": "enumerate"})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"problem": "lemma3", "method": "rollout"})")), ConfigError);
  EXPECT_NO_THROW(parse_config(json::parse(R"({"problem": "sqrt", "method": "augment"})")));
  EXPECT_THROW(parse_config(json::parse(R"({"problem": "sqrt", "threads": 0})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"problem": "sqrt", "method": "simplex"})")), ConfigError);
}

TEST(ParseConfig, InlineProblem) {
  const json doc = json::parse(R"({
    "problem": {"inline": {
      "horizon": 3,
      "dynamics": "integrator",
      "states": [[0], [1], [2]],
      "inputs": [[-1], [0], [1]],
      "box": {"lower": [0], "upper": [2]},
      "cost": {"family": "additive", "q": [1.0], "r": [0.5]},
      "initial_states": [[2]]
    }},
    "method": "bellman"})");
  const RunConfig c = parse_config(doc);
  EXPECT_EQ(c.problem, "inline");
  json bad = doc;
  bad["problem"]["inline"]["dynamics"] = "teleport";
  EXPECT_THROW(parse_config(bad), ConfigError);
  bad = doc;
  bad["problem"]["inline"]["colour"] = "red";
  EXPECT_THROW(parse_config(bad), ConfigError);
}

TEST(BudgetEnv, OverridesBothBudgets) {
  RunConfig c = parse_config(json::parse(R"({"problem": "sqrt"})"));
  ::setenv("GBE_BUDGET", "1234", 1);
  apply_budget_env(c);
  ::unsetenv("GBE_BUDGET");
  EXPECT_EQ(c.augment_budget, 1234u);
  EXPECT_EQ(c.enumeration_budget, 1234u);
  ::setenv("GBE_BUDGET", "lots", 1);
  EXPECT_THROW(apply_budget_env(c), ConfigError);
  ::unsetenv("GBE_BUDGET");
}

TEST(Run, SqrtManifestMatchesEnumeration) {
  RunConfig c = parse_config(json::parse(R"({"problem": {"builtin": "sqrt", "horizon": 3}})"));
  c.output = scratch_dir("sqrt");
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk);
  const json m = manifest_of(c.output);
  const double v = m.at("results").at(0).at("value").get<double>();
  EXPECT_NEAR(v, enumerate_solve(sqrt_msop(3).msop).value, 1e-12);
  EXPECT_FALSE(m.at("version").get<std::string>().empty());
}

// Every referenced file exists and its header matches the declared schema.
void expect_manifest_complete(const fs::path& dir) {
  const json m = manifest_of(dir);
  ASSERT_FALSE(m.at("outputs").empty());
  for (const auto& f : m.at("outputs")) {
    const fs::path p = dir / f.at("path").get<std::string>();
    ASSERT_TRUE(fs::exists(p)) << p;
    const std::string schema = f.at("schema").get<std::string>();
    if (schema.rfind("json:", 0) == 0) {
      const json doc = json::parse(slurp(p));
      std::stringstream keys(schema.substr(5));
      for (std::string k; std::getline(keys, k, ',');) EXPECT_TRUE(doc.contains(k)) << p << " lacks " << k;
    } else {
      std::ifstream in(p);
      std::string header;
      std::getline(in, header);
      EXPECT_EQ(header, schema) << p;
      std::string row;
      while (std::getline(in, row)) {
        EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(schema.begin(), schema.end(), ',')) << p;
      }
    }
  }
}

TEST(Run, FthmisEmitsMaskAndPolynomial) {
  RunConfig c = parse_config(json::parse(R"({"problem": {"builtin": "fthmis", "grid": 11, "inputs": 11}})"));
  c.output = scratch_dir("fthmis");
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk);
  EXPECT_TRUE(fs::exists(c.output / "mask.csv"));
  const json ls = json::parse(slurp(c.output / "levelset.json"));
  EXPECT_EQ(ls.at("degree").get<int>(), 4);
  EXPECT_EQ(ls.at("coefficients").size(), 15u);
  expect_manifest_complete(c.output);
}

TEST(Run, DubinsWritesOneTrajectoryPerInitialCondition) {
  RunConfig c = parse_config(json::parse(R"({"problem": {"builtin": "dubins", "grid_scale": 0.5}})"));
  c.output = scratch_dir("dubins");
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk);
  for (int k = 0; k < 3; ++k) EXPECT_TRUE(fs::exists(c.output / ("trajectory_" + std::to_string(k) + ".csv")));
  const json m = manifest_of(c.output);
  EXPECT_EQ(m.at("obstacles").at("obstacles").size(), 15u);
  EXPECT_EQ(m.at("results").size(), 3u);
  expect_manifest_complete(c.output);
}

TEST(Run, OutputsAreDeterministicAcrossThreadCounts) {
  RunConfig a = parse_config(json::parse(R"({"problem": {"builtin": "fthmis", "grid": 31, "inputs": 11}})"));
  RunConfig b = a;
  a.output = scratch_dir("det_a");
  b.output = scratch_dir("det_b");
  b.threads = 3;
  std::ostringstream log;
  ASSERT_EQ(run(a, log), kExitOk);
  ASSERT_EQ(run(b, log), kExitOk);
  for (const char* f : {"value_table.csv", "trajectory_0.csv", "mask.csv", "levelset.json"}) {
    EXPECT_EQ(slurp(a.output / f), slurp(b.output / f)) << f;
  }
}

TEST(Run, MethodsAgreeOnSqrt) {
  std::ostringstream log;
  double values[3];
  const char* methods[] = {"augment", "enumerate", "gbe"};
  for (int k = 0; k < 3; ++k) {
    RunConfig c = parse_config(json{{"problem", {{"builtin", "sqrt"}, {"horizon", 6}}}, {"method", methods[k]}});
    c.output = scratch_dir(std::string("methods_") + methods[k]);
    ASSERT_EQ(run(c, log), kExitOk);
    values[k] = manifest_of(c.output).at("results").at(0).at("value").get<double>();
    expect_manifest_complete(c.output);
  }
  EXPECT_NEAR(values[0], values[2], 1e-9);
  EXPECT_NEAR(values[1], values[2], 1e-9);
}

TEST(Verify, SqrtPasses) {
  RunConfig c = parse_config(json::parse(R"({"problem": {"builtin": "sqrt", "horizon": 3}})"));
  c.output = scratch_dir("verify_sqrt");
  std::ostringstream log;
  EXPECT_EQ(verify(c, log), kExitOk) << log.str();
  EXPECT_EQ(log.str().find("FAIL"), std::string::npos);
}

TEST(Verify, Lemma3ExpectedFailureExitsZero) {
  RunConfig c = parse_config(json::parse(R"({"problem": {"builtin": "lemma3", "h": 1.0}})"));
  c.output = scratch_dir("verify_lemma3");
  std::ostringstream log;
  EXPECT_EQ(verify(c, log), kExitOk) << log.str();
  EXPECT_NE(log.str().find("stage 2"), std::string::npos) << log.str();
}

TEST(Verify, PerturbedTableFails) {
  RunConfig c = parse_config(
      json::parse(R"({"problem": {"builtin": "sqrt", "horizon": 3}, "perturb": {"state": 0, "t": 1, "delta": 0.5}})"));
  c.output = scratch_dir("verify_perturb");
  std::ostringstream log;
  EXPECT_EQ(verify(c, log), kExitFailure);
}

TEST(Bench, SmallSweepAgrees) {
  BenchSettings s;
  s.gbe_horizons = {10, 20, 40};
  s.augment_horizons = {4, 5, 6, 30};
  s.rollout_horizons = {40};
  s.compare_horizons = {40};
  s.repeats = 1;
  std::ostringstream log;
  const auto rows = bench_rows(s, 1'000'000, log);
  int skipped = 0;
  for (const auto& r : rows) skipped += r.skipped;
  EXPECT_EQ(skipped, 1);
  RunConfig c = parse_config(json::parse(R"({"problem": "sqrt"})"));
  c.bench = s;
  c.augment_budget = 1'000'000;
  c.output = scratch_dir("bench");
  EXPECT_EQ(bench(c, log), kExitOk);
  const std::string csv = slurp(c.output / "bench.csv");
  EXPECT_EQ(csv.rfind("method,T,seconds,value\n", 0), 0u);
  EXPECT_NE(csv.find("augment,30,skipped,skipped"), std::string::npos);
}

TEST(Slopes, LogLogAndGrowth) {
  const std::vector<double> x{10, 100, 1000}, y{2, 20, 200};
  EXPECT_NEAR(loglog_slope(x, y), 1.0, 1e-12);
  const std::vector<double> t{1, 2, 3, 4}, z{3, 6, 12, 24};
  EXPECT_NEAR(growth_ratio(t, z), 2.0, 1e-12);
}

}  // namespace
}  // namespace gbe::app
