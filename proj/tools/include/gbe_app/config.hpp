#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbe/state_space.hpp"

namespace gbe::app {

/// Schema or compatibility violation in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { kGbe, kBellman, kAugment, kRollout, kEnumerate };
enum class TableOutput { kFull, kStage0, kNone };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct BenchSettings {
  std::vector<int> gbe_horizons{100, 1000, 10000};
  std::vector<int> augment_horizons{10, 11, 12, 13, 14, 15, 16};
  std::vector<int> rollout_horizons{100000};
  /// gbe is also timed at these horizons so rollout has a same-T comparison.
  std::vector<int> compare_horizons{100000};
  int repeats = 3;
};

/// Entry of a value table to shift before verification (fault injection).
struct Perturbation {
  std::size_t state = 0;
  int stage = 0;
  double delta = 1.0;
};

struct RunConfig {
  /// "sqrt", "lemma3", "dubins", "path3d", "fthmis" or "inline".
  std::string problem;
  Method method = Method::kGbe;
  int threads = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::filesystem::path output = "gbe_out";
  double value_tolerance = 1e-9;
  std::optional<TableOutput> table_output;  // default depends on the state space

  // Builtin parameters; only those of the chosen builtin are accepted.
  int horizon = 0;  // 0 selects the builtin's default
  double h = 1.0;
  double grid_scale = 1.0;
  bool moving = false;
  int grid = 21;
  int inputs = 21;
  int degree = 4;
  Lookup lookup = Lookup::kMultilinear;

  /// Validated inline problem (see instance.hpp for its schema).
  nlohmann::json inline_spec;

  std::size_t augment_budget = 100'000'000;
  std::size_t enumeration_budget = 1'000'000;

  BenchSettings bench;
  std::optional<Perturbation> perturb;
};

/// Validates a configuration document. Unknown keys, wrong types and
/// method/cost incompatibilities raise ConfigError naming the key.
RunConfig parse_config(const nlohmann::json& document);
RunConfig load_config(const std::filesystem::path& path);

/// Re-checks method compatibility after command-line overrides.
void check_compatibility(const RunConfig& config);

/// GBE_BUDGET, when set, replaces both the augmentation and enumeration budgets.
void apply_budget_env(RunConfig& config);

/// Grid points per dimension implied by the configuration, for grid problems.
std::vector<int> derived_grid(const RunConfig& config);

}  // namespace gbe::app
