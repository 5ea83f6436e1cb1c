#include "gbe/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include "json.hpp"

#include "gbe/errors.hpp"
#include "gbe/random.hpp"

namespace gbe {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool in_box(const Vec& x, const Vec& lower, const Vec& upper) {
  for (std::size_t d = 0; d < lower.size(); ++d) {
    if (x[d] < lower[d] || x[d] > upper[d]) return false;
  }
  return true;
}

// Euclidean distance from p to the axis-aligned box center +- half_width.
double distance_to_box(const Vec& p, const Vec& center, double half_width) {
  double s = 0.0;
  for (std::size_t d = 0; d < center.size(); ++d) {
    const double e = std::max(0.0, std::abs(p[d] - center[d]) - half_width);
    s += e * e;
  }
  return std::sqrt(s);
}

double distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

struct ObstacleSpec {
  std::size_t count;
  int dim;
  double center_lo, center_hi;
  double radius_lo, radius_hi;
  double drift;  // per-stage bound on |drift_d|; 0 for static
  Vec target_center;
  double target_half_width;
  double target_margin;
  std::vector<Vec> starts;  // position part only
  double start_margin;
  int horizon;
};

// Rejection sampling: obstacles never cover the target (at any stage) or a
// start position at stage 0.
ObstacleSet generate_obstacles(std::uint64_t seed, const ObstacleSpec& spec) {
  ObstacleSet set;
  set.seed = seed;
  std::mt19937_64 rng(seed);
  while (set.obstacles.size() < spec.count) {
    Obstacle ob;
    for (int d = 0; d < spec.dim; ++d) ob.center.push_back(uniform(rng, spec.center_lo, spec.center_hi));
    ob.radius = uniform(rng, spec.radius_lo, spec.radius_hi);
    if (spec.drift > 0.0) {
      for (int d = 0; d < spec.dim; ++d) ob.drift.push_back(uniform(rng, -spec.drift, spec.drift));
    }
    bool ok = true;
    for (int t = 0; t <= (spec.drift > 0.0 ? spec.horizon : 0) && ok; ++t) {
      Vec c = ob.center;
      for (std::size_t d = 0; d < ob.drift.size(); ++d) c[d] += ob.drift[d] * t;
      ok = distance_to_box(c, spec.target_center, spec.target_half_width) >= ob.radius + spec.target_margin;
    }
    for (const auto& s : spec.starts) {
      if (ok) ok = distance(ob.center, s) >= ob.radius + spec.start_margin;
    }
    if (ok) set.obstacles.push_back(std::move(ob));
  }
  return set;
}

std::vector<StagePredicate> planning_sets(int horizon, Vec lower, Vec upper,
                                          std::shared_ptr<const ObstacleSet> obstacles) {
  std::vector<StagePredicate> sets;
  for (int t = 0; t <= horizon; ++t) {
    sets.push_back([t, lower, upper, obstacles](const Vec& x) {
      return in_box(x, lower, upper) && !obstacles->blocks(x, t);
    });
  }
  return sets;
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

}  // namespace

// ---------------------------------------------------------------------------

SqrtProblem sqrt_msop(int horizon) {
  if (horizon < 1) throw StructuralError("the nested-radical problem needs T >= 1");
  SqrtProblem p;
  Msop& m = p.msop;
  m.horizon = horizon;
  m.dynamics = [](const Vec& /*x*/, const Vec& u, int /*t*/) { return Vec{u[0] == 0.5 ? 2.0 : 1.0}; };
  m.stage_sets.assign(static_cast<std::size_t>(horizon) + 1,
                      [](const Vec& x) { return x[0] == 1.0 || x[0] == 2.0; });
  m.inputs = InputSet::from_points({Vec{0.5}, Vec{1.0}});
  m.initial_state = Vec{2.0};

  RepMaps& r = m.rep_maps;
  r.family = "sqrt";
  r.horizon = horizon;
  r.terminal = [](const Vec& x) { return std::sqrt(x[0]); };
  r.stage = [](const Vec& x, const Vec& u, double z, int) { return std::sqrt(x[0] + u[0] + z); };
  r.strict.assign(static_cast<std::size_t>(horizon), 1);
  r.bounded = true;

  p.space = StateSpace::exact({Vec{1.0}, Vec{2.0}});

  // z(t) lists (x(0), u(0), ..., x(t-1), u(t-1)).
  p.fwd.horizon = horizon;
  p.fwd.first = [](const Vec& x, const Vec& u) { return Vec{x[0], u[0]}; };
  p.fwd.step = [](const Vec& x, const Vec& u, const Vec& z, int) {
    Vec out = z;
    out.push_back(x[0]);
    out.push_back(u[0]);
    return out;
  };
  p.fwd.terminal = [](const Vec& x, const Vec& z) {
    double v = std::sqrt(x[0]);
    for (std::size_t k = z.size(); k >= 2; k -= 2) v = std::sqrt(z[k - 2] + z[k - 1] + v);
    return v;
  };
  return p;
}

Policy sqrt_base_policy() {
  return [](const Vec&, int t) { return Vec{t % 4 == 0 ? 1.0 : 0.5}; };
}

// ---------------------------------------------------------------------------

Lemma3Problem lemma3_problem(double h) {
  if (!(h > 0.0)) throw StructuralError("h must be positive");
  Lemma3Problem p;
  p.h = h;
  constexpr int T = 3;

  p.additive_part.horizon = T;
  p.additive_part.stage = [](const Vec&, const Vec& u, int t) {
    switch (t) {
      case 0: return -u[0];
      case 1: return u[0];
      default: return -u[0] / 2.0;
    }
  };
  p.additive_part.terminal = [](const Vec&) { return 0.0; };

  Msop& m = p.msop;
  m.horizon = T;
  m.dynamics = [](const Vec& x, const Vec& u, int) { return Vec{x[0] + u[0]}; };
  m.stage_sets.assign(T + 1, [h](const Vec& x) { return x[0] >= 0.0 && x[0] <= h; });
  m.inputs = InputSet::from_points({Vec{-h}, Vec{0.0}, Vec{h}});
  m.rep_maps = additive_maps(p.additive_part);
  m.initial_state = Vec{0.0};

  p.space = StateSpace::exact({Vec{0.0}, Vec{h}});

  const StageCostSet c = p.additive_part;
  p.family_cost = [c](const Trajectory& traj) {
    double sum = 0.0;
    for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
      sum += c.stage(traj.states[k], traj.inputs[k], traj.start_stage + static_cast<int>(k));
    }
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& x : traj.states) peak = std::max(peak, x[0]);
    return sum + peak;
  };
  return p;
}

// ---------------------------------------------------------------------------

double Obstacle::h(const Vec& x, int t) const {
  double s = 0.0;
  for (std::size_t d = 0; d < center.size(); ++d) {
    const double c = center[d] + (d < drift.size() ? drift[d] * t : 0.0);
    s += (x[d] - c) * (x[d] - c);
  }
  return s - radius * radius;
}

bool ObstacleSet::blocks(const Vec& x, int t) const {
  return std::any_of(obstacles.begin(), obstacles.end(), [&](const Obstacle& o) { return o.contains(x, t); });
}

double ObstacleSet::clearance(const Vec& x, int t) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles) {
    if (o.active(t)) best = std::min(best, o.h(x, t));
  }
  return best;
}

std::string obstacles_to_json(const ObstacleSet& set) {
  nlohmann::json j;
  j["seed"] = set.seed;
  j["obstacles"] = nlohmann::json::array();
  for (const auto& o : set.obstacles) {
    j["obstacles"].push_back({{"stage_range", {o.first_stage, o.last_stage}},
                              {"center", std::vector<double>(o.center.begin(), o.center.end())},
                              {"radius", o.radius},
                              {"drift", std::vector<double>(o.drift.begin(), o.drift.end())}});
  }
  return j.dump(2);
}

ObstacleSet obstacles_from_json(std::string_view text) {
  ObstacleSet set;
  try {
    const auto j = nlohmann::json::parse(text);
    set.seed = j.value("seed", std::uint64_t{0});
    for (const auto& o : j.at("obstacles")) {
      Obstacle ob;
      const auto range = o.at("stage_range").get<std::vector<int>>();
      if (range.size() != 2) throw StructuralError("stage_range must have two entries");
      ob.first_stage = range[0];
      ob.last_stage = range[1];
      for (double c : o.at("center").get<std::vector<double>>()) ob.center.push_back(c);
      ob.radius = o.at("radius").get<double>();
      if (o.contains("drift")) {
        for (double c : o.at("drift").get<std::vector<double>>()) ob.drift.push_back(c);
      }
      set.obstacles.push_back(std::move(ob));
    }
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("malformed obstacle JSON: ") + e.what());
  }
  return set;
}

int scaled_resolution(int base, double grid_scale) {
  if (!(grid_scale > 0.0 && grid_scale <= 1.0)) throw StructuralError("grid_scale must lie in (0, 1]");
  return std::max(2, static_cast<int>(std::lround(base * grid_scale)));
}

Vec dubins_dynamics(const Vec& x, const Vec& u) {
  return Vec{x[0] + kDubinsSpeed * std::cos(x[2]), x[1] + kDubinsSpeed * std::sin(x[2]),
             wrap_angle(x[2] + (kDubinsSpeed / kDubinsLength) * std::tan(u[0]))};
}

PlanningProblem dubins_problem(std::uint64_t seed, double grid_scale, int horizon, Lookup lookup) {
  const int n = scaled_resolution(60, grid_scale);
  PlanningProblem p;
  p.name = "dubins";
  p.box_lower = Vec{-1.0, -1.0};
  p.box_upper = Vec{1.0, 1.0};
  p.target = TargetSet::open_box(Vec{0.75, -0.75}, 0.25);
  p.initial_states = {Vec{-0.8, 1.0, wrap_angle(-0.55 * std::numbers::pi)},
                      Vec{0.275, 0.25, 0.75 * std::numbers::pi}, Vec{-0.2, 0.95, 0.5 * std::numbers::pi}};

  ObstacleSpec spec{15, 2, -0.9, 0.9, 0.06, 0.14, 0.0, Vec{0.75, -0.75}, 0.25, 0.05, {}, 0.1, horizon};
  for (const auto& s : p.initial_states) spec.starts.push_back(Vec{s[0], s[1]});
  p.obstacles = generate_obstacles(seed, spec);

  auto obstacles = std::make_shared<const ObstacleSet>(p.obstacles);
  Msop& m = p.msop;
  m.horizon = horizon;
  m.dynamics = [](const Vec& x, const Vec& u, int) { return dubins_dynamics(x, u); };
  m.stage_sets = planning_sets(horizon, p.box_lower, p.box_upper, obstacles);
  m.inputs = InputSet::uniform(Vec{-1.0}, Vec{1.0}, {100});
  m.rep_maps = min_time_maps(p.target, horizon);
  m.initial_state = p.initial_states.front();

  p.space = StateSpace::uniform_grid(Vec{-1.0, -1.0, 0.0}, Vec{1.0, 1.0, kTwoPi}, {n, n, n}, lookup, {2});
  return p;
}

PlanningProblem path3d_problem(std::uint64_t seed, bool moving, double grid_scale, int horizon, Lookup lookup) {
  const int n = scaled_resolution(40, grid_scale);
  PlanningProblem p;
  p.name = moving ? "path3d_moving" : "path3d";
  p.box_lower = Vec{-1.0, -1.0, -1.0};
  p.box_upper = Vec{1.0, 1.0, 1.0};
  p.target = TargetSet::open_box(Vec{0.75, -0.75, -0.75}, 0.25);
  p.initial_states = {Vec{-0.75, 0.75, 0.75}, Vec{-0.75, -0.5, 0.5}, Vec{0.5, 0.75, 0.75},
                      Vec{-0.25, 0.75, -0.5}};

  ObstacleSpec spec{35,   3,    -0.9, 0.9,  0.08, 0.16, moving ? 0.005 : 0.0, Vec{0.75, -0.75, -0.75}, 0.25, 0.05,
                    p.initial_states, 0.1, horizon};
  p.obstacles = generate_obstacles(seed, spec);

  auto obstacles = std::make_shared<const ObstacleSet>(p.obstacles);
  Msop& m = p.msop;
  m.horizon = horizon;
  m.dynamics = [](const Vec& x, const Vec& u, int) { return Vec{x[0] + u[0], x[1] + u[1], x[2] + u[2]}; };
  m.stage_sets = planning_sets(horizon, p.box_lower, p.box_upper, obstacles);
  m.inputs = InputSet::uniform(Vec{-0.05, -0.05, -0.05}, Vec{0.05, 0.05, 0.05}, {5, 5, 5});
  m.rep_maps = min_time_maps(p.target, horizon);
  m.initial_state = p.initial_states.front();

  p.space = StateSpace::uniform_grid(p.box_lower, p.box_upper, {n, n, n}, lookup);
  return p;
}

int entry_stage(const TargetSet& target, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (target.contains(traj.states[k])) return traj.start_stage + static_cast<int>(k);
  }
  return -1;
}

// ---------------------------------------------------------------------------

double fthmis_g(const Vec& x, int t) {
  const double a = x[0] - (t - 1) / 4.0;
  const double b = x[1] - (t + 1) / 4.0;
  return a * a + b * b - 1.5;
}

Vec switching_dynamics(const Vec& x, const Vec& u) {
  const double s = 1.0 - (x[0] - 1.0) * (x[0] - 1.0) - x[1] * x[1];
  if (s <= 0.0) return Vec{x[0], (0.5 + u[0]) * x[0] - 0.1 * x[1]};
  return Vec{x[1], 0.2 * x[0] - (0.1 + u[0]) * x[1] + x[1] * x[1]};
}

FthmisProblem fthmis_problem(int grid_per_dim, int inputs, Lookup lookup) {
  if (grid_per_dim < 2 || inputs < 1) throw StructuralError("FTHMIS grid needs >= 2 points and >= 1 input");
  FthmisProblem p;
  p.constraint_costs.horizon = kFthmisHorizon;
  p.constraint_costs.stage = [](const Vec& x, const Vec&, int t) { return fthmis_g(x, t); };
  p.constraint_costs.terminal = [](const Vec& x) { return fthmis_g(x, kFthmisHorizon); };

  Msop& m = p.msop;
  m.horizon = kFthmisHorizon;
  m.dynamics = [](const Vec& x, const Vec& u, int) { return switching_dynamics(x, u); };
  m.stage_sets.assign(kFthmisHorizon + 1,
                      [](const Vec& x) { return std::abs(x[0]) <= 1.0 && std::abs(x[1]) <= 1.0; });
  m.inputs = inputs == 1 ? InputSet::from_points({Vec{0.0}}) : InputSet::uniform(Vec{-0.1}, Vec{0.1}, {inputs});
  m.rep_maps = max_maps(p.constraint_costs);

  p.space = StateSpace::uniform_grid(Vec{-1.0, -1.0}, Vec{1.0, 1.0}, {grid_per_dim, grid_per_dim}, lookup);
  return p;
}

std::vector<char> compute_fthmis(const ValueTable& table, const StateSpace& space) {
  std::vector<char> mask(space.size(), 0);
  for (std::size_t i = 0; i < space.size(); ++i) mask[i] = table.value(i, 0) < 0.0 ? 1 : 0;
  return mask;
}

namespace {

void total_degree_exponents(int dim, int degree, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == dim) {
    out.push_back(prefix);
    return;
  }
  int used = 0;
  for (int e : prefix) used += e;
  for (int e = 0; e + used <= degree; ++e) {
    prefix.push_back(e);
    total_degree_exponents(dim, degree, prefix, out);
    prefix.pop_back();
  }
}

double monomial(const Vec& x, const std::vector<int>& exps) {
  double v = 1.0;
  for (std::size_t d = 0; d < exps.size(); ++d) v *= std::pow(x[d], exps[d]);
  return v;
}

}  // namespace

double LevelSetFit::evaluate(const Vec& x) const {
  double v = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) v += coefficients[k] * monomial(x, exponents[k]);
  return v;
}

LevelSetFit fit_levelset(const StateSpace& space, std::span<const double> values, const std::vector<char>& mask,
                         int degree) {
  if (degree < 0) throw StructuralError("polynomial degree must be non-negative");
  if (values.size() != space.size() || mask.size() != space.size()) {
    throw StructuralError("value and mask arrays must match the state space");
  }
  LevelSetFit fit;
  fit.degree = degree;
  fit.mask = mask;
  std::vector<int> prefix;
  total_degree_exponents(space.dim(), degree, prefix, fit.exponents);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) rows.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(fit.exponents.size());
  fit.coefficients.assign(fit.exponents.size(), 0.0);

  Eigen::MatrixXd a(m, n);
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Vec x = space.state(rows[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = monomial(x, fit.exponents[static_cast<std::size_t>(c)]);
    b(r) = values[rows[static_cast<std::size_t>(r)]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (m < n || qr.rank() < n) {
    fit.residual = std::numeric_limits<double>::infinity();
  } else {
    const Eigen::VectorXd coef = qr.solve(b);
    for (Eigen::Index c = 0; c < n; ++c) fit.coefficients[static_cast<std::size_t>(c)] = coef(c);
    fit.residual = m == 0 ? 0.0 : (a * coef - b).cwiseAbs().maxCoeff();
  }

  std::size_t agree = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const bool inside = fit.evaluate(space.state(i)) < 0.0;
    if (inside == (mask[i] != 0)) ++agree;
  }
  fit.sign_agreement = space.size() == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(space.size());
  return fit;
}

}  // namespace gbe
