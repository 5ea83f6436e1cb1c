#include "gbe_app/instance.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "gbe/errors.hpp"

namespace gbe::app {
namespace {

using nlohmann::json;

Vec to_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError("'" + where + "' must be an array of numbers");
  Vec v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError("'" + where + "' must be an array of numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

std::vector<Vec> to_vec_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + where + "' must be a non-empty array of arrays");
  std::vector<Vec> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(to_vec(j[k], where + "[" + std::to_string(k) + "]"));
  for (const auto& v : out) {
    if (v.size() != out.front().size()) throw ConfigError("'" + where + "' entries must share one dimension");
  }
  return out;
}

void require_keys(const json& j, const std::vector<std::string>& keys, const std::string& where) {
  for (const auto& k : keys) {
    if (!j.contains(k)) throw ConfigError("missing required key '" + where + "." + k + "'");
  }
}

void allow_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + where + "." + key + "'");
    }
  }
}

int state_dim(const json& spec) {
  if (spec.contains("states")) return static_cast<int>(spec.at("states").at(0).size());
  return static_cast<int>(spec.at("grid").at("counts").size());
}

int input_dim(const json& spec) { return static_cast<int>(spec.at("inputs").at(0).size()); }

struct Quadratic {
  double offset = 0.0;
  Vec q, r, q_terminal;

  double stage(const Vec& x, const Vec& u) const {
    double v = offset;
    for (std::size_t d = 0; d < q.size(); ++d) v += q[d] * x[d] * x[d];
    for (std::size_t d = 0; d < r.size(); ++d) v += r[d] * u[d] * u[d];
    return v;
  }
  double terminal(const Vec& x) const {
    double v = offset;
    for (std::size_t d = 0; d < q_terminal.size(); ++d) v += q_terminal[d] * x[d] * x[d];
    return v;
  }
};

Quadratic parse_quadratic(const json& cost, int n, int m) {
  Quadratic qd;
  qd.q.assign(static_cast<std::size_t>(n), 0.0);
  qd.r.assign(static_cast<std::size_t>(m), 0.0);
  qd.q_terminal.assign(static_cast<std::size_t>(n), 0.0);
  if (cost.contains("offset")) qd.offset = cost.at("offset").get<double>();
  if (cost.contains("q")) qd.q = to_vec(cost.at("q"), "cost.q");
  if (cost.contains("r")) qd.r = to_vec(cost.at("r"), "cost.r");
  if (cost.contains("q_terminal")) qd.q_terminal = to_vec(cost.at("q_terminal"), "cost.q_terminal");
  if (qd.q.size() != static_cast<std::size_t>(n) || qd.q_terminal.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("'cost.q' and 'cost.q_terminal' need one weight per state dimension");
  }
  if (qd.r.size() != static_cast<std::size_t>(m)) throw ConfigError("'cost.r' needs one weight per input dimension");
  return qd;
}

Dynamics parse_dynamics(const json& d, int n, int m) {
  if (d.is_string()) {
    const auto s = d.get<std::string>();
    if (s == "integrator") {
      if (n != m) throw ConfigError("'dynamics' integrator needs equal state and input dimensions");
      return [](const Vec& x, const Vec& u, int) {
        Vec y = x;
        for (std::size_t k = 0; k < y.size(); ++k) y[k] += u[k];
        return y;
      };
    }
    if (s == "dubins") {
      if (n != 3 || m != 1) throw ConfigError("'dynamics' dubins needs 3 states and 1 input");
      return [](const Vec& x, const Vec& u, int) { return dubins_dynamics(x, u); };
    }
    if (s == "switching") {
      if (n != 2 || m != 1) throw ConfigError("'dynamics' switching needs 2 states and 1 input");
      return [](const Vec& x, const Vec& u, int) { return switching_dynamics(x, u); };
    }
    throw ConfigError("'dynamics' must be integrator, dubins, switching or {\"linear\": {A, B}}");
  }
  allow_keys(d, {"linear"}, "dynamics");
  const json& lin = d.at("linear");
  allow_keys(lin, {"A", "B"}, "dynamics.linear");
  require_keys(lin, {"A", "B"}, "dynamics.linear");
  const auto a = to_vec_list(lin.at("A"), "dynamics.linear.A");
  const auto b = to_vec_list(lin.at("B"), "dynamics.linear.B");
  if (a.size() != static_cast<std::size_t>(n) || a[0].size() != static_cast<std::size_t>(n) ||
      b.size() != static_cast<std::size_t>(n) || b[0].size() != static_cast<std::size_t>(m)) {
    throw ConfigError("'dynamics.linear' needs A of size n x n and B of size n x m");
  }
  return [a, b](const Vec& x, const Vec& u, int) {
    Vec y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
      for (std::size_t j = 0; j < u.size(); ++j) y[i] += b[i][j] * u[j];
    }
    return y;
  };
}

std::vector<StageSample> stage_samples(const StateSpace& space, const InputSet& inputs, int horizon) {
  constexpr std::size_t kMaxStates = 512;
  std::vector<StageSample> out;
  const std::size_t stride = std::max<std::size_t>(1, space.size() / kMaxStates);
  for (int t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < space.size(); i += stride) {
      for (const auto& u : inputs.points) out.push_back({space.state(i), u, t});
    }
  }
  return out;
}

Instance build_inline(const RunConfig& c) {
  const json& s = c.inline_spec;
  Instance inst;
  inst.name = "inline";
  const int T = s.at("horizon").get<int>();
  const int n = state_dim(s);
  const int m = input_dim(s);

  if (s.contains("states")) {
    inst.space = StateSpace::exact(to_vec_list(s.at("states"), "states"));
  } else {
    const json& g = s.at("grid");
    std::vector<int> angular;
    if (g.contains("angular_dims")) angular = g.at("angular_dims").get<std::vector<int>>();
    Lookup lookup = Lookup::kMultilinear;
    if (g.contains("lookup") && g.at("lookup").get<std::string>() == "nearest") lookup = Lookup::kNearest;
    inst.space = StateSpace::uniform_grid(to_vec(g.at("lower"), "grid.lower"), to_vec(g.at("upper"), "grid.upper"),
                                          g.at("counts").get<std::vector<int>>(), lookup, angular);
  }

  Msop& msop = inst.msop;
  msop.horizon = T;
  msop.dynamics = parse_dynamics(s.at("dynamics"), n, m);
  msop.inputs = InputSet::from_points(to_vec_list(s.at("inputs"), "inputs"));

  Vec lower, upper;
  if (s.contains("box")) {
    lower = to_vec(s.at("box").at("lower"), "box.lower");
    upper = to_vec(s.at("box").at("upper"), "box.upper");
    if (lower.size() != upper.size() || lower.size() > static_cast<std::size_t>(n)) {
      throw ConfigError("'box.lower' and 'box.upper' must match and cover at most the state dimension");
    }
  }
  auto obstacles = std::make_shared<ObstacleSet>();
  if (s.contains("obstacles")) {
    obstacles->seed = c.seed;
    obstacles->obstacles = obstacles_from_json(json{{"obstacles", s.at("obstacles")}}.dump()).obstacles;
    inst.obstacles = *obstacles;
  }
  auto space = std::make_shared<StateSpace>(inst.space);
  for (int t = 0; t <= T; ++t) {
    msop.stage_sets.push_back([t, lower, upper, obstacles, space](const Vec& x) {
      for (std::size_t d = 0; d < lower.size(); ++d) {
        if (x[d] < lower[d] || x[d] > upper[d]) return false;
      }
      if (obstacles->blocks(x, t)) return false;
      return !space->is_exact() || space->find(x).has_value();
    });
  }

  const json& cost = s.at("cost");
  const std::string family = cost.at("family").get<std::string>();
  const Quadratic qd = parse_quadratic(cost, n, m);
  StageCostSet costs;
  costs.horizon = T;
  costs.stage = [qd](const Vec& x, const Vec& u, int) { return qd.stage(x, u); };
  costs.terminal = [qd](const Vec& x) { return qd.terminal(x); };

  if (family == "additive") {
    msop.rep_maps = additive_maps(costs);
    inst.additive_costs = costs;
  } else if (family == "max") {
    msop.rep_maps = max_maps(costs);
  } else if (family == "multiplicative") {
    const auto samples = stage_samples(inst.space, msop.inputs, T);
    msop.rep_maps = multiplicative_maps(MultiplicativeCostSet::deterministic(costs), samples);
  } else if (family == "stopped_additive") {
    const double p = cost.contains("stop_probability") ? cost.at("stop_probability").get<double>() : 0.0;
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("'cost.stop_probability' must lie in [0, 1]");
    StoppingProbSet probs;
    probs.horizon = T;
    probs.stage = [p](const Vec&, const Vec&, int) { return p; };
    probs.terminal = [](const Vec&) { return 1.0; };
    msop.rep_maps = stopped_additive_maps(costs, probs, stage_samples(inst.space, msop.inputs, T));
  } else if (family == "min_time") {
    if (!cost.contains("target")) throw ConfigError("missing required key 'cost.target' for min_time");
    const json& tg = cost.at("target");
    inst.target = TargetSet::open_box(to_vec(tg.at("center"), "cost.target.center"),
                                      tg.at("half_width").get<double>());
    msop.rep_maps = min_time_maps(*inst.target, T);
  }

  inst.initial_states = to_vec_list(s.at("initial_states"), "initial_states");
  msop.initial_state = inst.initial_states.front();
  if (s.contains("base_policy")) {
    const Vec u = to_vec(s.at("base_policy").at("constant"), "base_policy.constant");
    inst.base_policy = [u](const Vec&, int) { return u; };
  }
  return inst;
}

}  // namespace

void validate_inline(const json& s) {
  allow_keys(s, {"horizon", "dynamics", "states", "grid", "box", "obstacles", "inputs", "cost", "initial_states",
                 "base_policy"},
             "inline");
  require_keys(s, {"horizon", "dynamics", "inputs", "cost", "initial_states"}, "inline");
  if (!s.at("horizon").is_number_integer() || s.at("horizon").get<int>() < 1) {
    throw ConfigError("'inline.horizon' must be an integer >= 1");
  }
  if (s.contains("states") == s.contains("grid")) {
    throw ConfigError("'inline' needs exactly one of 'states' (exact-finite) or 'grid' (sampled-grid)");
  }
  if (s.contains("states")) to_vec_list(s.at("states"), "inline.states");
  if (s.contains("grid")) {
    const json& g = s.at("grid");
    allow_keys(g, {"lower", "upper", "counts", "lookup", "angular_dims"}, "inline.grid");
    require_keys(g, {"lower", "upper", "counts"}, "inline.grid");
    const auto lo = to_vec(g.at("lower"), "inline.grid.lower");
    const auto hi = to_vec(g.at("upper"), "inline.grid.upper");
    if (!g.at("counts").is_array() || lo.size() != hi.size() || g.at("counts").size() != lo.size()) {
      throw ConfigError("'inline.grid' lower, upper and counts must have one entry per dimension");
    }
    for (const auto& k : g.at("counts")) {
      if (!k.is_number_integer() || k.get<int>() < 2) throw ConfigError("'inline.grid.counts' entries must be >= 2");
    }
    if (g.contains("lookup")) {
      if (!g.at("lookup").is_string() ||
          (g.at("lookup") != "multilinear" && g.at("lookup") != "nearest")) {
        throw ConfigError("'inline.grid.lookup' must be \"multilinear\" or \"nearest\"");
      }
    }
  }
  if (s.contains("box")) {
    allow_keys(s.at("box"), {"lower", "upper"}, "inline.box");
    require_keys(s.at("box"), {"lower", "upper"}, "inline.box");
  }
  to_vec_list(s.at("inputs"), "inline.inputs");
  const auto starts = to_vec_list(s.at("initial_states"), "inline.initial_states");
  if (starts.front().size() != static_cast<std::size_t>(state_dim(s))) {
    throw ConfigError("'inline.initial_states' must match the state dimension");
  }
  const json& cost = s.at("cost");
  allow_keys(cost, {"family", "q", "r", "q_terminal", "offset", "stop_probability", "target"}, "inline.cost");
  require_keys(cost, {"family"}, "inline.cost");
  static const std::vector<std::string> families{"additive", "max", "multiplicative", "stopped_additive", "min_time"};
  if (!cost.at("family").is_string() ||
      std::find(families.begin(), families.end(), cost.at("family").get<std::string>()) == families.end()) {
    throw ConfigError("'inline.cost.family' must be one of additive, max, multiplicative, stopped_additive, min_time");
  }
  if (cost.contains("target")) {
    allow_keys(cost.at("target"), {"center", "half_width"}, "inline.cost.target");
    require_keys(cost.at("target"), {"center", "half_width"}, "inline.cost.target");
  }
  if (s.contains("base_policy")) {
    allow_keys(s.at("base_policy"), {"constant"}, "inline.base_policy");
    require_keys(s.at("base_policy"), {"constant"}, "inline.base_policy");
  }
  // Dynamics and cost weights are checked against the dimensions here too.
  parse_dynamics(s.at("dynamics"), state_dim(s), input_dim(s));
  parse_quadratic(cost, state_dim(s), input_dim(s));
}

Capabilities capabilities(const RunConfig& c) {
  if (c.problem == "sqrt") return {"sqrt", true, true, true};
  if (c.problem == "lemma3") return {"additive", true, false, false};
  if (c.problem == "dubins" || c.problem == "path3d") return {"min_time", false, false, false};
  if (c.problem == "fthmis") return {"max", false, false, false};
  const json& s = c.inline_spec;
  return {s.at("cost").at("family").get<std::string>(), s.contains("states"), false, s.contains("base_policy")};
}

Instance build_instance(const RunConfig& c) {
  Instance inst;
  inst.name = c.problem;
  if (c.problem == "sqrt") {
    auto p = sqrt_msop(c.horizon > 0 ? c.horizon : 10);
    inst.msop = std::move(p.msop);
    inst.space = std::move(p.space);
    inst.forward = std::move(p.fwd);
    inst.base_policy = sqrt_base_policy();
    inst.initial_states = {*inst.msop.initial_state};
  } else if (c.problem == "lemma3") {
    auto p = lemma3_problem(c.h);
    inst.msop = std::move(p.msop);
    inst.space = std::move(p.space);
    inst.additive_costs = std::move(p.additive_part);
    inst.family_cost = std::move(p.family_cost);
    inst.initial_states = {*inst.msop.initial_state};
  } else if (c.problem == "dubins" || c.problem == "path3d") {
    PlanningProblem p =
        c.problem == "dubins"
            ? dubins_problem(c.seed_set ? c.seed : kDefaultDubinsSeed, c.grid_scale,
                             c.horizon > 0 ? c.horizon : kDubinsHorizon, c.lookup)
            : path3d_problem(c.seed_set ? c.seed : kDefaultPath3dSeed, c.moving, c.grid_scale,
                             c.horizon > 0 ? c.horizon : kPath3dHorizon, c.lookup);
    inst.name = p.name;
    inst.msop = std::move(p.msop);
    inst.space = std::move(p.space);
    inst.obstacles = std::move(p.obstacles);
    inst.target = std::move(p.target);
    inst.initial_states = std::move(p.initial_states);
  } else if (c.problem == "fthmis") {
    auto p = fthmis_problem(c.grid, c.inputs, c.lookup);
    inst.msop = std::move(p.msop);
    inst.space = std::move(p.space);
    inst.invariant_set = true;
  } else {
    inst = build_inline(c);
  }
  inst.msop.validate();
  return inst;
}

}  // namespace gbe::app
