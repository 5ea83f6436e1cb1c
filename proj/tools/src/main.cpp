#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gbe/errors.hpp"
#include "gbe/version.hpp"
#include "gbe_app/commands.hpp"
#include "gbe_app/config.hpp"

namespace {

using gbe::app::ConfigError;
using gbe::app::RunConfig;

struct Flags {
  std::string config;
  std::string out;
  std::string problem;
  std::string method;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_scale;
  std::optional<int> degree;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--threads", f.threads, "Worker threads for the stage sweep")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Seed for obstacles and sampling");
}

// Loads the config (or a default document) and applies command-line overrides.
RunConfig resolve(const Flags& f, const nlohmann::json& fallback) {
  RunConfig c = f.config.empty() ? gbe::app::parse_config(fallback) : gbe::app::load_config(f.config);
  if (!f.out.empty()) c.output = f.out;
  if (f.threads) c.threads = *f.threads;
  if (f.seed) {
    c.seed = *f.seed;
    c.seed_set = true;
  }
  if (!f.method.empty()) c.method = gbe::app::parse_method(f.method);
  if (f.grid_scale) {
    if (c.problem != "dubins" && c.problem != "path3d") throw ConfigError("--grid-scale applies to dubins and path3d");
    if (!(*f.grid_scale > 0.0 && *f.grid_scale <= 1.0)) throw ConfigError("--grid-scale must lie in (0, 1]");
    c.grid_scale = *f.grid_scale;
  }
  if (f.degree) {
    if (c.problem != "fthmis") throw ConfigError("--degree applies to the fthmis problem");
    if (*f.degree < 0) throw ConfigError("--degree must be non-negative");
    c.degree = *f.degree;
  }
  gbe::app::check_compatibility(c);
  gbe::app::apply_budget_env(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic programming with the generalized Bellman equation"};
  app.set_version_flag("--version", std::string(gbe::version()));
  app.require_subcommand(1);

  Flags solve_f, plan_f, inv_f, bench_f, verify_f;

  auto* solve = app.add_subcommand("solve", "Solve a configured problem and write its artifacts");
  add_common(solve, solve_f);
  solve->add_option("--method", solve_f.method, "gbe, bellman, augment, rollout or enumerate");
  solve->add_option("--grid-scale", solve_f.grid_scale, "Grid resolution factor in (0, 1]");
  solve->add_option("--degree", solve_f.degree, "Level-set polynomial degree");

  auto* plan = app.add_subcommand("plan", "Minimum-time path planning (dubins or path3d)");
  add_common(plan, plan_f);
  plan->add_option("--problem", plan_f.problem, "dubins or path3d when no config is given")
      ->check(CLI::IsMember({"dubins", "path3d"}));
  plan->add_option("--grid-scale", plan_f.grid_scale, "Grid resolution factor in (0, 1]");
  plan->add_option("--method", plan_f.method, "Solver method");

  auto* inv = app.add_subcommand("invariant", "Finite-horizon maximal invariant set and its level-set fit");
  add_common(inv, inv_f);
  inv->add_option("--degree", inv_f.degree, "Level-set polynomial degree");

  auto* bench = app.add_subcommand("bench", "Timing sweep over horizons for gbe, augment and rollout");
  add_common(bench, bench_f);

  auto* verify = app.add_subcommand("verify", "Oracle checks for a configured problem");
  add_common(verify, verify_f);
  verify->add_option("--method", verify_f.method, "Solver method");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      if (solve_f.config.empty()) throw ConfigError("solve needs --config");
      return gbe::app::run(resolve(solve_f, {}), std::cout);
    }
    if (plan->parsed()) {
      const std::string name = plan_f.problem.empty() ? "dubins" : plan_f.problem;
      RunConfig c = resolve(plan_f, {{"problem", name}});
      if (c.problem != "dubins" && c.problem != "path3d") throw ConfigError("plan needs a dubins or path3d problem");
      return gbe::app::run(c, std::cout);
    }
    if (inv->parsed()) {
      RunConfig c = resolve(inv_f, {{"problem", "fthmis"}});
      if (c.problem != "fthmis") throw ConfigError("invariant needs the fthmis problem");
      return gbe::app::run(c, std::cout);
    }
    if (bench->parsed()) {
      return gbe::app::bench(resolve(bench_f, {{"problem", "sqrt"}}), std::cout);
    }
    if (verify->parsed()) {
      if (verify_f.config.empty()) throw ConfigError("verify needs --config");
      return gbe::app::verify(resolve(verify_f, {}), std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gbe::app::kExitConfig;
  } catch (const gbe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gbe::app::kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gbe::app::kExitFailure;
  }
  return gbe::app::kExitOk;
}
