#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gbe/costs.hpp"
#include "gbe/oracle.hpp"
#include "gbe/problems.hpp"
#include "gbe/solver.hpp"
#include "gbe/state_space.hpp"
#include "gbe/types.hpp"
#include "gbe_app/config.hpp"

namespace gbe::app {

/// A concrete problem together with everything the methods may need.
struct Instance {
  std::string name;
  Msop msop;
  StateSpace space = StateSpace::exact({});
  std::vector<Vec> initial_states;

  std::optional<StageCostSet> additive_costs;  // bellman
  std::optional<ForwardMaps> forward;          // augment
  std::optional<Policy> base_policy;           // rollout
  std::optional<CostFunctional> family_cost;   // non rep-map costs (lemma3)
  std::optional<ObstacleSet> obstacles;
  std::optional<TargetSet> target;
  bool invariant_set = false;  // fthmis: emit mask and level set
};

/// Static capabilities of a configured problem, known without building it.
struct Capabilities {
  std::string family;
  bool exact = false;
  bool forward = false;
  bool base_policy = false;
};

Capabilities capabilities(const RunConfig& config);

/// Builds the configured problem. The inline schema is
///
///   horizon: int
///   dynamics: "integrator" | "dubins" | "switching" | {"linear": {"A": [[..]], "B": [[..]]}}
///   states: [[..], ..]                      exact-finite space, or
///   grid: {lower, upper, counts, lookup?, angular_dims?}
///   box?: {lower, upper}                    X_t bounds on the leading coordinates
///   obstacles?: [{center, radius, drift?, stage_range?}]
///   inputs: [[..], ..]
///   cost: {family, q?, r?, q_terminal?, offset?, stop_probability?, target?: {center, half_width}}
///   initial_states: [[..], ..]
///   base_policy?: {constant: [..]}
///
/// with cost families additive, max, multiplicative, stopped_additive and
/// min_time. Quadratic stage costs are offset + sum q_d x_d^2 + sum r_d u_d^2.
Instance build_instance(const RunConfig& config);

/// Structural validation of an inline problem document.
void validate_inline(const nlohmann::json& spec);

}  // namespace gbe::app
