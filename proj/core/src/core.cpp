#include "gbe/core.hpp"

#include <string>

namespace gbe {

double evaluate_cost(const RepMaps& maps, const Trajectory& traj) {
  const int steps = static_cast<int>(traj.inputs.size());
  if (traj.states.size() != traj.inputs.size() + 1) {
    throw StructuralError("trajectory has " + std::to_string(traj.states.size()) + " states for " +
                          std::to_string(steps) + " inputs");
  }
  if (traj.start_stage < 0 || traj.start_stage + steps != maps.horizon) {
    throw StructuralError("trajectory covers stages " + std::to_string(traj.start_stage) + ".." +
                          std::to_string(traj.start_stage + steps) + " but maps have horizon " +
                          std::to_string(maps.horizon));
  }
  double z = maps.terminal(traj.states.back());
  for (int k = steps - 1; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    z = apply_stage(maps, traj.states[i], traj.inputs[i], z, traj.start_stage + k);
  }
  return z;
}

std::vector<std::size_t> feasible_controls(const Msop& msop, const Vec& x, int t) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < msop.inputs.size(); ++k) {
    if (msop.in_stage_set(msop.dynamics(x, msop.inputs[k], t), t + 1)) out.push_back(k);
  }
  return out;
}

Trajectory rollout_trajectory(const Msop& msop, const Vec& x0, const Policy& policy, int start_stage) {
  Trajectory traj;
  traj.start_stage = start_stage;
  traj.states.push_back(x0);
  traj.feasible = msop.in_stage_set(x0, start_stage);
  if (!traj.feasible) {
    traj.cost = kInfeasible;
    return traj;
  }
  Vec x = x0;
  for (int t = start_stage; t < msop.horizon; ++t) {
    Vec u = policy(x, t);
    if (!msop.inputs.index_of(u)) {
      throw ContractError("policy returned an input outside U at stage " + std::to_string(t));
    }
    x = msop.dynamics(x, u, t);
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(x);
    if (!msop.in_stage_set(x, t + 1)) {
      traj.feasible = false;
      traj.cost = kInfeasible;
      return traj;
    }
  }
  traj.cost = evaluate_cost(msop.rep_maps, traj);
  return traj;
}

void score_trajectory(const Msop& msop, Trajectory& traj) {
  traj.feasible = traj.states.size() == traj.inputs.size() + 1 && traj.end_stage() == msop.horizon;
  for (std::size_t k = 0; traj.feasible && k < traj.states.size(); ++k) {
    traj.feasible = msop.in_stage_set(traj.states[k], traj.start_stage + static_cast<int>(k));
  }
  for (std::size_t k = 0; traj.feasible && k < traj.inputs.size(); ++k) {
    traj.feasible = msop.inputs.index_of(traj.inputs[k]).has_value() &&
                    msop.dynamics(traj.states[k], traj.inputs[k], traj.start_stage + static_cast<int>(k)) ==
                        traj.states[k + 1];
  }
  traj.cost = traj.feasible ? evaluate_cost(msop.rep_maps, traj) : kInfeasible;
}

}  // namespace gbe
