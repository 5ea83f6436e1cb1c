#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gbe/costs.hpp"
#include "gbe/state_space.hpp"
#include "gbe/types.hpp"

namespace gbe {

inline constexpr std::size_t kDefaultEnumerationBudget = 1'000'000;
inline constexpr double kTieTolerance = 1e-12;

/// Cost of a (possibly tail) trajectory; `traj.start_stage` selects J_t.
using CostFunctional = std::function<double(const Trajectory& traj)>;

/// Tail costs J_t realized by the MSOP's own representation maps.
CostFunctional rep_map_cost(const RepMaps& maps);

struct EnumerationResult {
  bool feasible = false;
  Trajectory best;
  double value = kInfeasible;
  bool unique = false;
  std::size_t candidates = 0;  // |U|^(T - start)
  std::size_t feasible_count = 0;
};

/// Evaluates every input sequence from (x0, start_stage) and returns a
/// global minimizer (first in lexicographic input order), its value, and
/// whether any other feasible sequence comes within 1e-12 of it. Throws
/// ResourceError if |U|^(T - start_stage) exceeds `budget`.
EnumerationResult enumerate_solve(const Msop& msop, const Vec& x0, int start_stage, const CostFunctional& cost,
                                  std::size_t budget = kDefaultEnumerationBudget);
/// Stage-0 solve from msop.initial_state using the MSOP's maps.
EnumerationResult enumerate_solve(const Msop& msop, std::size_t budget = kDefaultEnumerationBudget);

struct PoReport {
  bool holds = true;
  int witness_stage = -1;
  double claimed_tail_cost = 0.0;
  double better_tail_cost = 0.0;
  Trajectory better_tail;
};

/// Checks, for every 0 <= t < T, that the tail of `solution` from stage t
/// solves the problem re-initialized at (x(t), t) under the family `cost`.
/// Reports the first stage where a strictly better tail exists.
PoReport check_principle_of_optimality(const Msop& msop, const CostFunctional& cost, const Trajectory& solution,
                                       std::size_t budget = kDefaultEnumerationBudget);

/// Tail of a stage-0 trajectory from stage t.
Trajectory tail_of(const Trajectory& traj, int t);

struct ValueCheckReport {
  ValidationReport report;
  std::size_t entries_checked = 0;
  std::size_t entries_skipped = 0;  // over budget
  bool partial() const { return entries_skipped > 0; }
};

/// Compares every table entry with the enumerated tail infimum over the
/// exact-finite state list to 1e-9. The terminal slice is checked against
/// phi_T pointwise.
ValueCheckReport verify_value_function(const ValueTable& table, const Msop& msop, const StateSpace& space,
                                       std::size_t budget = kDefaultEnumerationBudget);

}  // namespace gbe
