#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gbe/costs.hpp"
#include "gbe/oracle.hpp"
#include "gbe/solver.hpp"
#include "gbe/state_space.hpp"
#include "gbe/types.hpp"

namespace gbe {

// ---------------------------------------------------------------------------
// Nested-radical benchmark

struct SqrtProblem {
  Msop msop;
  StateSpace space = StateSpace::exact({});
  ForwardMaps fwd;
};

/// min sqrt(x0 + u0 + sqrt(... sqrt(x(T-1) + u(T-1) + sqrt(x(T))))) with
/// x+ = 2 if u = 0.5 and 1 if u = 1, X = {1, 2}, x0 = 2.
SqrtProblem sqrt_msop(int horizon);

/// u = 1 when t is a multiple of 4 (t = 0 included), 0.5 otherwise.
Policy sqrt_base_policy();

// ---------------------------------------------------------------------------
// Counterexample to the Principle of Optimality

struct Lemma3Problem {
  double h = 1.0;
  /// Carries the additive part of the cost as its maps (d = 0).
  Msop msop;
  StateSpace space = StateSpace::exact({});
  StageCostSet additive_part;
  /// J_t = sum_{s >= t} c_s(u(s)) + max_{s >= t} x(s), evaluated directly.
  CostFunctional family_cost;
};

/// T = 3, f = x + u, X_t = [0, h], U = {-h, 0, h}, c_0 = -u, c_1 = u,
/// c_2 = -u/2, d(x) = x, x0 = 0.
Lemma3Problem lemma3_problem(double h);

// ---------------------------------------------------------------------------
// Obstacles and planning problems

struct Obstacle {
  int first_stage = 0;
  int last_stage = -1;  // -1: through the horizon
  Vec center;
  double radius = 0.0;
  Vec drift;  // per-stage center velocity; empty or zeros for static

  bool active(int t) const { return t >= first_stage && (last_stage < 0 || t <= last_stage); }
  /// h(x, t) = |x - center - drift * t|^2 - radius^2 over the center's
  /// coordinates; the obstacle is {h < 0}.
  double h(const Vec& x, int t) const;
  bool contains(const Vec& x, int t) const { return active(t) && h(x, t) < 0.0; }
};

struct ObstacleSet {
  std::uint64_t seed = 0;
  std::vector<Obstacle> obstacles;

  bool blocks(const Vec& x, int t) const;
  /// Smallest h over active obstacles (>= 0 means collision-free).
  double clearance(const Vec& x, int t) const;
};

std::string obstacles_to_json(const ObstacleSet& set);
ObstacleSet obstacles_from_json(std::string_view text);

struct PlanningProblem {
  std::string name;
  Msop msop;
  StateSpace space = StateSpace::exact({});
  ObstacleSet obstacles;
  TargetSet target;
  Vec box_lower;  // position box (first box_lower.size() coordinates)
  Vec box_upper;
  std::vector<Vec> initial_states;
};

inline constexpr std::uint64_t kDefaultDubinsSeed = 7;
inline constexpr std::uint64_t kDefaultPath3dSeed = 11;
inline constexpr int kDubinsHorizon = 40;
inline constexpr int kPath3dHorizon = 60;
inline constexpr double kDubinsSpeed = 0.1;
inline constexpr double kDubinsLength = 1.0 / 6.0;

/// Scaled grid resolution, round(base * scale) clamped to >= 2.
int scaled_resolution(int base, double grid_scale);

/// Dubin's car on [-1,1]^2 x [0, 2pi) with 15 seeded circular obstacles,
/// target square around (0.75, -0.75) and 100 steering inputs on [-1, 1].
/// Default grid 60^3, scaled by grid_scale in (0, 1].
PlanningProblem dubins_problem(std::uint64_t seed = kDefaultDubinsSeed, double grid_scale = 1.0,
                               int horizon = kDubinsHorizon, Lookup lookup = Lookup::kMultilinear);

Vec dubins_dynamics(const Vec& x, const Vec& u);

/// Integrator x+ = x + u on [-1,1]^3 with 35 seeded spheres (drifting when
/// `moving`), target cube around (0.75, -0.75, -0.75), U = 5^3 grid on
/// [-0.05, 0.05]^3. Default grid 40^3, scaled by grid_scale.
PlanningProblem path3d_problem(std::uint64_t seed = kDefaultPath3dSeed, bool moving = false, double grid_scale = 1.0,
                               int horizon = kPath3dHorizon, Lookup lookup = Lookup::kMultilinear);

/// First stage with x(t) in S, or -1.
int entry_stage(const TargetSet& target, const Trajectory& traj);

// ---------------------------------------------------------------------------
// Finite-horizon maximal invariant set

struct FthmisProblem {
  Msop msop;
  StateSpace space = StateSpace::exact({});
  StageCostSet constraint_costs;  // c_t = g_t
};

inline constexpr int kFthmisHorizon = 4;

double fthmis_g(const Vec& x, int t);
Vec switching_dynamics(const Vec& x, const Vec& u);

/// Switching system on X_t = [-1,1]^2, U = `inputs` points on [-0.1, 0.1],
/// T = 4, cost max_k g_k(x(k)).
FthmisProblem fthmis_problem(int grid_per_dim = 5, int inputs = 21, Lookup lookup = Lookup::kMultilinear);

/// {x : V(x, 0) < 0} over the stage-0 grid.
std::vector<char> compute_fthmis(const ValueTable& table, const StateSpace& space);

struct LevelSetFit {
  int degree = 0;
  std::vector<std::vector<int>> exponents;  // one monomial per coefficient
  std::vector<double> coefficients;
  double residual = 0.0;  // max |fit - sample| over finite samples; +inf if rank deficient
  double sign_agreement = 0.0;
  std::vector<char> mask;

  double evaluate(const Vec& x) const;
};

/// Least-squares fit of a total-degree polynomial to the finite entries of
/// `values` at the grid nodes; sign agreement compares {fit < 0} to `mask`
/// at every node.
LevelSetFit fit_levelset(const StateSpace& space, std::span<const double> values, const std::vector<char>& mask,
                         int degree);

}  // namespace gbe
