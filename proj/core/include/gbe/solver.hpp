#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gbe/core.hpp"
#include "gbe/costs.hpp"
#include "gbe/state_space.hpp"
#include "gbe/types.hpp"

namespace gbe {

inline constexpr std::size_t kDefaultAugmentBudget = 100'000'000;

struct SolveOptions {
  int threads = 1;
  /// Stages with fewer states than this run on the calling thread.
  std::size_t parallel_threshold = 512;
  /// Optional per-stage list of state indices (size T+1). Only listed
  /// states are evaluated at a stage; every other entry stays +inf. The list
  /// must cover every state of X_t in the space.
  const std::vector<std::vector<std::size_t>>* stage_support = nullptr;
};

/// Backward sweep of F(x,T) = phi_T(x), F(x,t) = min over Gamma_{x,t} of
/// phi_t(x, u, F(f(x,u,t), t+1)) over every state of `space`. Membership of
/// successors is tested on the continuous state; their values come from the
/// space's lookup policy. Ties keep the first listed input. Throws
/// EmptyProblemError when no state has a finite value at some stage.
ValueTable solve_gbe(const Msop& msop, const StateSpace& space, const SolveOptions& options = {});

/// Classical Bellman recursion for additive costs, independent of RepMaps.
ValueTable solve_bellman_additive(const Msop& msop, const StageCostSet& costs, const StateSpace& space,
                                  const SolveOptions& options = {});

/// V(x, t) at an arbitrary state: the stage-t backup against the stored
/// stage-(t+1) slice. At grid nodes this reproduces the table entry.
double value_at(const Msop& msop, const StateSpace& space, const ValueTable& table, const Vec& x, int t);

/// Self-consistency pass: largest |V(x,t) - backup(x,t)| over feasible
/// entries (0 means the table is an exact GBE fixed point), or +inf if the
/// sentinel pattern disagrees.
double gbe_residual(const Msop& msop, const StateSpace& space, const ValueTable& table);

/// Greedy policy against the table, simulated on the continuous state.
/// Throws InfeasibleError when V(x0, 0) = +inf. Logs a warning (through
/// `set_warning_sink`) if the maps are not flagged strictly monotone.
Trajectory extract_policy(const Msop& msop, const StateSpace& space, const ValueTable& table, const Vec& x0);

/// Receives solver warnings; defaults to std::clog.
void set_warning_sink(std::function<void(const std::string&)> sink);

/// psi_0(x, u) -> z(1); psi_t(x, u, z, t) -> z(t+1) for t = 1..T-1;
/// psi_T(x, z) -> real. Composition runs forward in time.
struct ForwardMaps {
  int horizon = 0;
  std::function<Vec(const Vec& x, const Vec& u)> first;
  std::function<Vec(const Vec& x, const Vec& u, const Vec& z, int t)> step;
  std::function<double(const Vec& x, const Vec& z)> terminal;
};

/// Forward-composed cost of a stage-0 trajectory.
double evaluate_forward_cost(const ForwardMaps& fwd, const Trajectory& traj);

/// Additively separable equivalent of a forward-separable MSOP. Augmented
/// states are [x, z]; the state list is every augmented state reachable
/// from the initial state, with X~_t the stage-t reachable subset.
struct AugmentedMsop {
  Msop msop;
  StateSpace space = StateSpace::exact({});
  StageCostSet costs;
  std::size_t state_count = 0;
  std::size_t base_dim = 0;
  /// Indices of X~_t in `space`, per stage.
  std::vector<std::vector<std::size_t>> stage_support;
};

/// Throws ResourceError once (augmented states) x (T+1) value-table entries
/// would exceed `budget`; the error reports the count reached.
AugmentedMsop augment_forward_separable(const Msop& msop, const ForwardMaps& fwd,
                                        std::size_t budget = kDefaultAugmentBudget);

/// solve_gbe on the augmented MSOP restricted to its reachable stage sets.
ValueTable solve_augmented(const AugmentedMsop& aug, SolveOptions options = {});

/// Drops the augmentation coordinates from a trajectory of the augmented MSOP.
Trajectory project_augmented(const AugmentedMsop& aug, const Trajectory& traj);

/// Tail cost of the base policy from (x, t) with memoization over
/// (stage, state). +inf if the base policy leaves the constraints.
class RolloutEvaluator {
 public:
  RolloutEvaluator(const Msop& msop, Policy base);

  double value(const Vec& x, int t);
  /// As value(), for x already known to lie in X_t.
  double value_of_member(const Vec& x, int t);
  std::size_t memo_size() const;

 private:
  // Few states per stage are typical along a rollout, so each stage keeps a
  // flat list and only switches to a hash map once it grows.
  struct StageMemo {
    boost::container::small_vector<std::pair<Vec, double>, 2> flat;
    std::unordered_map<Vec, double, VecHash> map;

    const double* find(const Vec& x) const;
    void insert(Vec x, double v);
    std::size_t size() const { return flat.size() + map.size(); }
  };

  struct Step {
    Vec x;
    Vec u;
    int t;
  };

  const Msop& msop_;
  Policy base_;
  std::vector<StageMemo> memo_;
  std::vector<Step> chain_;  // scratch, reused across calls
};

/// Ṽ(x, t): evaluate_cost of the base-policy tail trajectory from (x, t).
double rollout_value(const Msop& msop, const Policy& base, const Vec& x, int t);

/// Greedy one-step lookahead against the base-policy tail cost. A dead end
/// (empty Gamma) returns the truncated trajectory flagged infeasible.
Trajectory rollout_policy(const Msop& msop, const Policy& base, const Vec& x0);

}  // namespace gbe
