#include "gbe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "gbe/errors.hpp"

namespace gbe {
namespace {

struct Backup {
  double value = kInfeasible;
  std::int32_t arg = -1;
};

std::mutex g_sink_mutex;
std::function<void(const std::string&)> g_warning_sink;

void warn(const std::string& message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_warning_sink) {
    g_warning_sink(message);
  } else {
    std::clog << "warning: " << message << '\n';
  }
}

template <typename StageFn>
Backup backup(const Msop& msop, const StateSpace& space, std::span<const double> next, const Vec& x, int t,
              const StageFn& stage_fn) {
  Backup best;
  if (!msop.in_stage_set(x, t)) return best;
  const auto& inputs = msop.inputs.points;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Vec y = msop.dynamics(x, inputs[k], t);
    if (!msop.in_stage_set(y, t + 1)) continue;
    const double z = space.lookup(next, y);
    if (z == kInfeasible) continue;
    const double v = stage_fn(x, inputs[k], z, t);
    if (v < best.value) {
      best.value = v;
      best.arg = static_cast<std::int32_t>(k);
    }
  }
  return best;
}

void check_nonempty(std::span<const double> slice, int t) {
  if (std::none_of(slice.begin(), slice.end(), [](double v) { return v < kInfeasible; })) {
    throw EmptyProblemError("every state is infeasible at stage " + std::to_string(t), t);
  }
}

template <typename TerminalFn, typename StageFn>
ValueTable sweep(const Msop& msop, const StateSpace& space, const SolveOptions& options, const TerminalFn& terminal_fn,
                 const StageFn& stage_fn) {
  msop.validate();
  const int T = msop.horizon;
  const auto n = static_cast<std::int64_t>(space.size());
  ValueTable table(space.size(), T);
  const int threads = std::max(1, options.threads);
  const bool parallel = threads > 1 && space.size() >= options.parallel_threshold;

  const auto* support = options.stage_support;
  if (support && support->size() != static_cast<std::size_t>(T) + 1) {
    throw StructuralError("stage support needs one index list per stage");
  }
  // Number of states evaluated at stage t, and the k-th of them.
  auto count_at = [&](int t) {
    return support ? static_cast<std::int64_t>((*support)[static_cast<std::size_t>(t)].size()) : n;
  };
  auto index_at = [&](int t, std::int64_t k) {
    return support ? (*support)[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] : static_cast<std::size_t>(k);
  };

  {
    auto slice = table.stage(T);
    const std::int64_t m = count_at(T);
#pragma omp parallel for schedule(static) num_threads(threads) if (parallel)
    for (std::int64_t k = 0; k < m; ++k) {
      const std::size_t idx = index_at(T, k);
      const Vec x = space.state(idx);
      slice[idx] = msop.in_stage_set(x, T) ? terminal_fn(x) : kInfeasible;
    }
    check_nonempty(slice, T);
  }

  for (int t = T - 1; t >= 0; --t) {
    const auto next = std::as_const(table).stage(t + 1);
    const std::int64_t m = count_at(t);
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads) if (parallel)
    for (std::int64_t k = 0; k < m; ++k) {
      const std::size_t idx = index_at(t, k);
      const Backup b = space.is_exact() ? backup(msop, space, next, space.listed_state(idx), t, stage_fn)
                                        : backup(msop, space, next, space.state(idx), t, stage_fn);
      table.value(idx, t) = b.value;
      table.argmin(idx, t) = b.arg;
    }
    check_nonempty(std::as_const(table).stage(t), t);
  }
  return table;
}

}  // namespace

void set_warning_sink(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(g_sink_mutex);
  g_warning_sink = std::move(sink);
}

ValueTable solve_gbe(const Msop& msop, const StateSpace& space, const SolveOptions& options) {
  const RepMaps& maps = msop.rep_maps;
  return sweep(
      msop, space, options, [&](const Vec& x) { return maps.terminal(x); },
      [&](const Vec& x, const Vec& u, double z, int t) { return maps.stage(x, u, z, t); });
}

ValueTable solve_bellman_additive(const Msop& msop, const StageCostSet& costs, const StateSpace& space,
                                  const SolveOptions& options) {
  if (costs.horizon != msop.horizon) throw StructuralError("stage cost horizon differs from MSOP horizon");
  return sweep(
      msop, space, options, [&](const Vec& x) { return costs.terminal(x); },
      [&](const Vec& x, const Vec& u, double z, int t) { return costs.stage(x, u, t) + z; });
}

double value_at(const Msop& msop, const StateSpace& space, const ValueTable& table, const Vec& x, int t) {
  if (t == msop.horizon) return msop.in_stage_set(x, t) ? msop.rep_maps.terminal(x) : kInfeasible;
  const RepMaps& maps = msop.rep_maps;
  return backup(msop, space, table.stage(t + 1), x, t,
                [&](const Vec& s, const Vec& u, double z, int k) { return maps.stage(s, u, z, k); })
      .value;
}

double gbe_residual(const Msop& msop, const StateSpace& space, const ValueTable& table) {
  double worst = 0.0;
  for (int t = msop.horizon; t >= 0; --t) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      const double stored = table.value(i, t);
      const double recomputed = value_at(msop, space, table, space.state(i), t);
      if ((stored == kInfeasible) != (recomputed == kInfeasible)) return kInfeasible;
      if (stored != kInfeasible) worst = std::max(worst, std::abs(stored - recomputed));
    }
  }
  return worst;
}

Trajectory extract_policy(const Msop& msop, const StateSpace& space, const ValueTable& table, const Vec& x0) {
  const RepMaps& maps = msop.rep_maps;
  if (!maps.all_strict()) {
    warn("representation maps '" + maps.family +
         "' are not flagged strictly monotone; the greedy trajectory is optimal but other optima may not satisfy "
         "the greedy condition");
  }
  if (value_at(msop, space, table, x0, 0) == kInfeasible) {
    throw InfeasibleError("no feasible trajectory: V(x0, 0) = +inf");
  }
  auto stage_fn = [&](const Vec& s, const Vec& u, double z, int k) { return maps.stage(s, u, z, k); };

  Trajectory traj;
  traj.start_stage = 0;
  traj.states.push_back(x0);
  Vec x = x0;
  for (int t = 0; t < msop.horizon; ++t) {
    const Backup b = backup(msop, space, table.stage(t + 1), x, t, stage_fn);
    if (b.arg < 0) {
      traj.feasible = false;
      traj.cost = kInfeasible;
      return traj;
    }
    const Vec& u = msop.inputs[static_cast<std::size_t>(b.arg)];
    x = msop.dynamics(x, u, t);
    traj.inputs.push_back(u);
    traj.states.push_back(x);
  }
  traj.feasible = true;
  traj.cost = evaluate_cost(maps, traj);
  return traj;
}

double evaluate_forward_cost(const ForwardMaps& fwd, const Trajectory& traj) {
  if (traj.start_stage != 0 || static_cast<int>(traj.inputs.size()) != fwd.horizon ||
      traj.states.size() != traj.inputs.size() + 1) {
    throw StructuralError("forward cost needs a full stage-0 trajectory of the maps' horizon");
  }
  if (fwd.horizon == 0) return fwd.terminal(traj.states[0], Vec{});
  Vec z = fwd.first(traj.states[0], traj.inputs[0]);
  for (int t = 1; t < fwd.horizon; ++t) {
    const auto k = static_cast<std::size_t>(t);
    z = fwd.step(traj.states[k], traj.inputs[k], z, t);
  }
  return fwd.terminal(traj.states.back(), z);
}

namespace {

struct AugmentedIndex {
  std::size_t base_dim = 0;
  std::unordered_map<Vec, std::size_t, VecHash> index;
  std::vector<boost::container::small_vector<int, 1>> stages;

  bool contains(const Vec& s, int t) const {
    auto it = index.find(s);
    if (it == index.end()) return false;
    const auto& tags = stages[it->second];
    return std::find(tags.begin(), tags.end(), t) != tags.end();
  }
};

Vec split_state(const Vec& aug, std::size_t n) { return Vec(aug.begin(), aug.begin() + static_cast<std::ptrdiff_t>(n)); }
Vec split_memory(const Vec& aug, std::size_t n) { return Vec(aug.begin() + static_cast<std::ptrdiff_t>(n), aug.end()); }

}  // namespace

AugmentedMsop augment_forward_separable(const Msop& msop, const ForwardMaps& fwd, std::size_t budget) {
  if (fwd.horizon != msop.horizon) throw StructuralError("forward maps horizon differs from MSOP horizon");
  if (!msop.initial_state) throw StructuralError("state augmentation needs an initial state");
  const int T = msop.horizon;
  const Vec& x0 = *msop.initial_state;
  const std::size_t n = x0.size();
  const std::size_t stages = static_cast<std::size_t>(T) + 1;

  auto idx = std::make_shared<AugmentedIndex>();
  idx->base_dim = n;
  std::vector<Vec> states;
  std::vector<std::size_t> frontier;
  std::vector<std::vector<std::size_t>> support(stages);

  auto visit = [&](Vec s, int t) {
    for (auto& c : s) c += 0.0;
    auto [it, inserted] = idx->index.try_emplace(s, states.size());
    if (inserted) {
      const std::size_t count = states.size() + 1;
      if (count > budget / stages) {
        throw ResourceError("augmented value table needs at least " + std::to_string(count) + " states x " +
                                std::to_string(stages) + " stages, over the budget of " + std::to_string(budget),
                            count * stages, budget);
      }
      states.push_back(std::move(s));
      idx->stages.emplace_back();
    }
    auto& tags = idx->stages[it->second];
    if (std::find(tags.begin(), tags.end(), t) == tags.end()) {
      tags.push_back(t);
      frontier.push_back(it->second);
      support[static_cast<std::size_t>(t)].push_back(it->second);
    }
  };

  if (msop.in_stage_set(x0, 0)) visit(x0, 0);
  for (int t = 0; t < T; ++t) {
    std::vector<std::size_t> current;
    current.swap(frontier);
    for (std::size_t i : current) {
      const Vec x = split_state(states[i], n);
      const Vec z = split_memory(states[i], n);
      for (const auto& u : msop.inputs.points) {
        Vec y = msop.dynamics(x, u, t);
        if (!msop.in_stage_set(y, t + 1)) continue;
        const Vec zn = t == 0 ? fwd.first(x, u) : fwd.step(x, u, z, t);
        y.insert(y.end(), zn.begin(), zn.end());
        visit(std::move(y), t + 1);
      }
    }
  }

  AugmentedMsop aug;
  aug.base_dim = n;
  aug.state_count = states.size();
  aug.stage_support = std::move(support);

  aug.costs.horizon = T;
  aug.costs.stage = [](const Vec&, const Vec&, int) { return 0.0; };
  aug.costs.terminal = [n, terminal = fwd.terminal](const Vec& s) { return terminal(split_state(s, n), split_memory(s, n)); };

  Msop& m = aug.msop;
  m.horizon = T;
  m.inputs = msop.inputs;
  m.initial_state = x0;
  m.dynamics = [n, f = msop.dynamics, fwd](const Vec& s, const Vec& u, int t) {
    const Vec x = split_state(s, n);
    Vec y = f(x, u, t);
    const Vec zn = t == 0 ? fwd.first(x, u) : fwd.step(x, u, split_memory(s, n), t);
    y.insert(y.end(), zn.begin(), zn.end());
    return y;
  };
  m.stage_sets.reserve(stages);
  for (int t = 0; t <= T; ++t) {
    m.stage_sets.emplace_back([idx, t](const Vec& s) { return idx->contains(s, t); });
  }
  m.rep_maps = additive_maps(aug.costs);
  aug.space = StateSpace::exact(std::move(states));
  return aug;
}

ValueTable solve_augmented(const AugmentedMsop& aug, SolveOptions options) {
  options.stage_support = &aug.stage_support;
  return solve_gbe(aug.msop, aug.space, options);
}

Trajectory project_augmented(const AugmentedMsop& aug, const Trajectory& traj) {
  Trajectory out = traj;
  for (auto& s : out.states) s = split_state(s, aug.base_dim);
  return out;
}

const double* RolloutEvaluator::StageMemo::find(const Vec& x) const {
  if (map.empty()) {
    for (const auto& [s, v] : flat) {
      if (s == x) return &v;
    }
    return nullptr;
  }
  auto it = map.find(x);
  return it == map.end() ? nullptr : &it->second;
}

void RolloutEvaluator::StageMemo::insert(Vec x, double v) {
  constexpr std::size_t kFlatLimit = 16;
  if (map.empty() && flat.size() < kFlatLimit) {
    flat.emplace_back(std::move(x), v);
    return;
  }
  if (map.empty()) {
    for (auto& [s, w] : flat) map.emplace(std::move(s), w);
    flat.clear();
  }
  map.emplace(std::move(x), v);
}

RolloutEvaluator::RolloutEvaluator(const Msop& msop, Policy base)
    : msop_(msop), base_(std::move(base)), memo_(static_cast<std::size_t>(msop.horizon) + 1) {
  chain_.reserve(static_cast<std::size_t>(msop.horizon) + 1);
}

std::size_t RolloutEvaluator::memo_size() const {
  std::size_t total = 0;
  for (const auto& m : memo_) total += m.size();
  return total;
}

double RolloutEvaluator::value(const Vec& x, int t) {
  if (!msop_.in_stage_set(x, t)) return kInfeasible;
  return value_of_member(x, t);
}

double RolloutEvaluator::value_of_member(const Vec& x, int t) {
  auto& chain = chain_;
  chain.clear();
  Vec cur = x;
  int s = t;
  double tail = kInfeasible;
  for (;;) {
    auto& memo = memo_[static_cast<std::size_t>(s)];
    if (const double* hit = memo.find(cur)) {
      tail = *hit;
      break;
    }
    if (s == msop_.horizon) {
      tail = msop_.rep_maps.terminal(cur);
      memo.insert(cur, tail);
      break;
    }
    Vec u = base_(cur, s);
    if (!msop_.inputs.index_of(u)) {
      throw ContractError("base policy returned an input outside U at stage " + std::to_string(s));
    }
    Vec next = msop_.dynamics(cur, u, s);
    chain.push_back(Step{std::move(cur), std::move(u), s});
    if (!msop_.in_stage_set(next, s + 1)) {
      tail = kInfeasible;
      break;
    }
    cur = std::move(next);
    ++s;
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    tail = apply_stage(msop_.rep_maps, it->x, it->u, tail, it->t);
    memo_[static_cast<std::size_t>(it->t)].insert(std::move(it->x), tail);
  }
  return tail;
}

double rollout_value(const Msop& msop, const Policy& base, const Vec& x, int t) {
  RolloutEvaluator ev(msop, base);
  return ev.value(x, t);
}

Trajectory rollout_policy(const Msop& msop, const Policy& base, const Vec& x0) {
  RolloutEvaluator ev(msop, base);
  const RepMaps& maps = msop.rep_maps;
  Trajectory traj;
  traj.inputs.reserve(static_cast<std::size_t>(msop.horizon));
  traj.states.reserve(static_cast<std::size_t>(msop.horizon) + 1);
  traj.states.push_back(x0);
  if (!msop.in_stage_set(x0, 0)) return traj;
  Vec x = x0;
  for (int t = 0; t < msop.horizon; ++t) {
    double best = kInfeasible;
    std::ptrdiff_t arg = -1;
    Vec best_next;
    for (std::size_t k = 0; k < msop.inputs.size(); ++k) {
      const Vec& u = msop.inputs[k];
      Vec y = msop.dynamics(x, u, t);
      if (!msop.in_stage_set(y, t + 1)) continue;
      const double v = apply_stage(maps, x, u, ev.value_of_member(y, t + 1), t);
      // The first feasible input stands in when every candidate is +inf.
      if (arg < 0 || v < best) {
        best = v;
        arg = static_cast<std::ptrdiff_t>(k);
        best_next = std::move(y);
      }
    }
    if (arg < 0) return traj;  // dead end
    traj.inputs.push_back(msop.inputs[static_cast<std::size_t>(arg)]);
    traj.states.push_back(best_next);
    x = std::move(best_next);
  }
  traj.feasible = true;
  traj.cost = evaluate_cost(maps, traj);
  return traj;
}

}  // namespace gbe
