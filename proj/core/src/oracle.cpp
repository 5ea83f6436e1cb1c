#include "gbe/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gbe/core.hpp"
#include "gbe/errors.hpp"

namespace gbe {
namespace {

std::size_t count_sequences(std::size_t inputs, int steps, std::size_t budget) {
  std::size_t total = 1;
  for (int k = 0; k < steps; ++k) {
    if (total > budget / std::max<std::size_t>(inputs, 1)) {
      throw ResourceError("enumeration of " + std::to_string(inputs) + "^" + std::to_string(steps) +
                              " input sequences exceeds the budget of " + std::to_string(budget),
                          std::numeric_limits<std::size_t>::max(), budget);
    }
    total *= inputs;
  }
  if (total > budget) {
    throw ResourceError("enumeration of " + std::to_string(total) + " input sequences exceeds the budget of " +
                            std::to_string(budget),
                        total, budget);
  }
  return total;
}

struct Enumerator {
  const Msop& msop;
  const CostFunctional& cost;
  EnumerationResult result;
  Trajectory work;

  void leaf() {
    ++result.feasible_count;
    work.feasible = true;
    const double v = cost(work);
    work.cost = v;
    if (!result.feasible || v < result.value - kTieTolerance) {
      result.unique = true;
      result.feasible = true;
      result.value = v;
      result.best = work;
    } else if (std::abs(v - result.value) <= kTieTolerance) {
      result.unique = false;
      if (v < result.value) {
        result.value = v;
        result.best = work;
      }
    }
  }

  void descend(int t) {
    if (t == msop.horizon) {
      leaf();
      return;
    }
    const Vec x = work.states.back();
    for (const auto& u : msop.inputs.points) {
      Vec y = msop.dynamics(x, u, t);
      if (!msop.in_stage_set(y, t + 1)) continue;
      work.inputs.push_back(u);
      work.states.push_back(std::move(y));
      descend(t + 1);
      work.inputs.pop_back();
      work.states.pop_back();
    }
  }
};

}  // namespace

CostFunctional rep_map_cost(const RepMaps& maps) {
  return [maps](const Trajectory& traj) { return evaluate_cost(maps, traj); };
}

EnumerationResult enumerate_solve(const Msop& msop, const Vec& x0, int start_stage, const CostFunctional& cost,
                                  std::size_t budget) {
  Enumerator e{msop, cost, {}, {}};
  e.result.candidates = count_sequences(msop.inputs.size(), msop.horizon - start_stage, budget);
  e.work.start_stage = start_stage;
  e.work.states.push_back(x0);
  if (msop.in_stage_set(x0, start_stage)) e.descend(start_stage);
  if (!e.result.feasible) e.result.unique = false;
  return e.result;
}

EnumerationResult enumerate_solve(const Msop& msop, std::size_t budget) {
  if (!msop.initial_state) throw StructuralError("enumerate_solve needs an initial state");
  return enumerate_solve(msop, *msop.initial_state, 0, rep_map_cost(msop.rep_maps), budget);
}

Trajectory tail_of(const Trajectory& traj, int t) {
  const auto k = static_cast<std::ptrdiff_t>(t - traj.start_stage);
  Trajectory tail;
  tail.start_stage = t;
  tail.inputs.assign(traj.inputs.begin() + k, traj.inputs.end());
  tail.states.assign(traj.states.begin() + k, traj.states.end());
  tail.feasible = traj.feasible;
  return tail;
}

PoReport check_principle_of_optimality(const Msop& msop, const CostFunctional& cost, const Trajectory& solution,
                                       std::size_t budget) {
  PoReport report;
  for (int t = solution.start_stage; t < msop.horizon; ++t) {
    Trajectory tail = tail_of(solution, t);
    const double claimed = cost(tail);
    const auto best = enumerate_solve(msop, tail.states.front(), t, cost, budget);
    if (best.feasible && best.value < claimed - kTieTolerance) {
      report.holds = false;
      report.witness_stage = t;
      report.claimed_tail_cost = claimed;
      report.better_tail_cost = best.value;
      report.better_tail = best.best;
      return report;
    }
  }
  return report;
}

ValueCheckReport verify_value_function(const ValueTable& table, const Msop& msop, const StateSpace& space,
                                       std::size_t budget) {
  if (!space.is_exact()) throw StructuralError("value-function verification needs an exact-finite state space");
  ValueCheckReport out;
  out.report.check = "value_function";
  const CostFunctional cost = rep_map_cost(msop.rep_maps);
  for (int t = msop.horizon; t >= 0; --t) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      const Vec x = space.state(i);
      double expected = kInfeasible;
      if (t == msop.horizon) {
        if (msop.in_stage_set(x, t)) expected = msop.rep_maps.terminal(x);
      } else {
        try {
          const auto e = enumerate_solve(msop, x, t, cost, budget);
          if (e.feasible) expected = e.value;
        } catch (const ResourceError&) {
          ++out.entries_skipped;
          continue;
        }
      }
      ++out.entries_checked;
      ++out.report.samples;
      const double got = table.value(i, t);
      const bool both_inf = expected == kInfeasible && got == kInfeasible;
      if (!both_inf && !(std::abs(got - expected) <= 1e-9)) {
        out.report.add_violation("V(state " + std::to_string(i) + ", t=" + std::to_string(t) + ") = " +
                                 std::to_string(got) + ", enumerated tail infimum " + std::to_string(expected));
      }
    }
  }
  return out;
}

}  // namespace gbe
