#pragma once

#include <cstddef>
#include <vector>

#include "gbe/errors.hpp"
#include "gbe/state_space.hpp"
#include "gbe/types.hpp"

namespace gbe {

/// Backward composition phi_s(x(s), u(s), phi_{s+1}(... phi_T(x(T)))) where
/// s = traj.start_stage. Throws StructuralError unless the trajectory ends
/// at the maps' horizon with one more state than inputs.
double evaluate_cost(const RepMaps& maps, const Trajectory& traj);

/// Indices k of inputs with f(x, u_k, t) in X_{t+1}, in listed order.
std::vector<std::size_t> feasible_controls(const Msop& msop, const Vec& x, int t);

/// Simulates `policy` from (x0, start_stage). On the first constraint
/// violation the trajectory is truncated at the violating state, marked
/// infeasible and given cost +inf. Throws ContractError if the policy
/// returns an input that is not listed in U.
Trajectory rollout_trajectory(const Msop& msop, const Vec& x0, const Policy& policy, int start_stage = 0);

/// Replaces traj.feasible and traj.cost by checking every constraint and
/// evaluating the backward composition.
void score_trajectory(const Msop& msop, Trajectory& traj);

}  // namespace gbe
