#include "gbe/costs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "gbe/errors.hpp"
#include "gbe/random.hpp"

namespace gbe {
namespace {

constexpr std::size_t kMaxListedViolations = 8;

std::string describe(const Vec& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

}  // namespace

void ValidationReport::add_violation(std::string message) {
  ++violation_count;
  if (violations.size() < kMaxListedViolations) violations.push_back(std::move(message));
}

TargetSet TargetSet::open_box(Vec center, double half_width) {
  return TargetSet{[center = std::move(center), half_width](const Vec& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < center.size(); ++d) m = std::max(m, std::abs(x[d] - center[d]));
    return m - half_width;
  }};
}

QuadratureRule QuadratureRule::point_mass(double at) { return QuadratureRule{{at}, {1.0}}; }

QuadratureRule QuadratureRule::gauss_legendre(double a, double b) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& abscissa = Rule::abscissa();
  const auto& weight = Rule::weights();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  QuadratureRule q;
  // Boost stores the nonnegative half of a symmetric rule.
  for (std::size_t k = 0; k < abscissa.size(); ++k) {
    if (abscissa[k] == 0.0) {
      q.nodes.push_back(mid);
      q.weights.push_back(half * weight[k]);
      continue;
    }
    q.nodes.push_back(mid - half * abscissa[k]);
    q.weights.push_back(half * weight[k]);
    q.nodes.push_back(mid + half * abscissa[k]);
    q.weights.push_back(half * weight[k]);
  }
  return q;
}

MultiplicativeCostSet MultiplicativeCostSet::deterministic(const StageCostSet& costs) {
  MultiplicativeCostSet m;
  m.horizon = costs.horizon;
  m.stage = [c = costs.stage](const Vec& x, const Vec& u, double, int t) { return c(x, u, t); };
  m.terminal = [c = costs.terminal](const Vec& x, double) { return c(x); };
  m.density = [](const Vec&, const Vec&, double, int) { return 1.0; };
  m.terminal_density = [](const Vec&, double) { return 1.0; };
  m.bounded = costs.bounded;
  return m;
}

RepMaps additive_maps(const StageCostSet& costs) {
  RepMaps maps;
  maps.family = "additive";
  maps.horizon = costs.horizon;
  maps.terminal = costs.terminal;
  maps.stage = [c = costs.stage](const Vec& x, const Vec& u, double z, int t) { return c(x, u, t) + z; };
  maps.strict.assign(static_cast<std::size_t>(costs.horizon), 1);
  maps.bounded = costs.bounded;
  return maps;
}

RepMaps max_maps(const StageCostSet& costs) {
  RepMaps maps;
  maps.family = "max";
  maps.horizon = costs.horizon;
  maps.terminal = costs.terminal;
  maps.stage = [c = costs.stage](const Vec& x, const Vec& u, double z, int t) { return std::max(c(x, u, t), z); };
  maps.strict.assign(static_cast<std::size_t>(costs.horizon), 0);
  maps.bounded = costs.bounded;
  return maps;
}

RepMaps multiplicative_maps(const MultiplicativeCostSet& costs, std::span<const StageSample> samples) {
  const auto& sq = costs.stage_rule;
  const auto& tq = costs.terminal_rule;
  if (sq.nodes.size() != sq.weights.size() || tq.nodes.size() != tq.weights.size() || sq.nodes.empty() ||
      tq.nodes.empty()) {
    throw ValidationError("multiplicative maps: malformed quadrature rule");
  }

  auto stage_factor = [costs](const Vec& x, const Vec& u, int t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < costs.stage_rule.nodes.size(); ++k) {
      const double w = costs.stage_rule.nodes[k];
      acc += costs.stage_rule.weights[k] * costs.density(x, u, w, t) * costs.stage(x, u, w, t);
    }
    return acc;
  };
  auto terminal_value = [costs](const Vec& x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < costs.terminal_rule.nodes.size(); ++k) {
      const double w = costs.terminal_rule.nodes[k];
      acc += costs.terminal_rule.weights[k] * costs.terminal_density(x, w) * costs.terminal(x, w);
    }
    return acc;
  };

  std::vector<char> strict(static_cast<std::size_t>(costs.horizon), 1);
  for (const auto& s : samples) {
    if (s.t < 0 || s.t >= costs.horizon) continue;
    double mass = 0.0;
    for (std::size_t k = 0; k < sq.nodes.size(); ++k) {
      const double w = sq.nodes[k];
      mass += sq.weights[k] * costs.density(s.x, s.u, w, s.t);
      if (costs.stage(s.x, s.u, w, s.t) < 0.0) {
        throw ValidationError("multiplicative maps: negative stage cost at x=" + describe(s.x) +
                              " t=" + std::to_string(s.t));
      }
    }
    if (std::abs(mass - 1.0) > 1e-6) {
      throw ValidationError("multiplicative maps: stage density integrates to " + std::to_string(mass) +
                            " at x=" + describe(s.x) + " t=" + std::to_string(s.t));
    }
    double tmass = 0.0;
    for (std::size_t k = 0; k < tq.nodes.size(); ++k) tmass += tq.weights[k] * costs.terminal_density(s.x, tq.nodes[k]);
    if (std::abs(tmass - 1.0) > 1e-6) {
      throw ValidationError("multiplicative maps: terminal density integrates to " + std::to_string(tmass) +
                            " at x=" + describe(s.x));
    }
    if (stage_factor(s.x, s.u, s.t) == 0.0) strict[static_cast<std::size_t>(s.t)] = 0;
  }

  RepMaps maps;
  maps.family = "multiplicative";
  maps.horizon = costs.horizon;
  maps.terminal = terminal_value;
  maps.stage = [stage_factor](const Vec& x, const Vec& u, double z, int t) { return z * stage_factor(x, u, t); };
  maps.strict = std::move(strict);
  maps.bounded = costs.bounded;
  return maps;
}

RepMaps stopped_additive_maps(const StageCostSet& costs, const StoppingProbSet& probs,
                              std::span<const StageSample> samples, std::span<const Trajectory> trajectories) {
  if (costs.horizon != probs.horizon) throw StructuralError("stopped additive maps: cost and probability horizons differ");
  std::vector<char> strict(static_cast<std::size_t>(costs.horizon), 1);
  bool terminal_is_one = true;
  for (const auto& s : samples) {
    if (s.t >= 0 && s.t < costs.horizon) {
      const double p = probs.stage(s.x, s.u, s.t);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("stopping probability " + std::to_string(p) + " outside [0,1] at stage " +
                              std::to_string(s.t));
      }
      if (p == 1.0) strict[static_cast<std::size_t>(s.t)] = 0;
    }
    const double pt = probs.terminal(s.x);
    if (!(pt >= 0.0 && pt <= 1.0)) throw ValidationError("terminal stopping probability outside [0,1]");
    if (pt != 1.0) terminal_is_one = false;
  }
  if (!terminal_is_one) {
    if (trajectories.empty()) {
      throw ValidationError("p_T is not identically 1; total probability must be checked on sample trajectories");
    }
    auto report = check_total_probability(probs, trajectories);
    if (!report.passed()) {
      throw ValidationError("stopping probabilities violate the total-probability identity: " +
                            (report.violations.empty() ? std::string{} : report.violations.front()));
    }
  }

  RepMaps maps;
  maps.family = "stopped_additive";
  maps.horizon = costs.horizon;
  maps.terminal = [c = costs.terminal, p = probs.terminal](const Vec& x) { return c(x) * p(x); };
  maps.stage = [c = costs.stage, p = probs.stage](const Vec& x, const Vec& u, double z, int t) {
    return c(x, u, t) + z * (1.0 - p(x, u, t));
  };
  maps.strict = std::move(strict);
  maps.bounded = costs.bounded;
  return maps;
}

RepMaps min_time_maps(const TargetSet& target, int horizon) {
  RepMaps maps;
  maps.family = "min_time";
  maps.horizon = horizon;
  maps.terminal = [horizon](const Vec&) { return static_cast<double>(horizon); };
  // t * 1_S(x) + z * (1 - 1_S(x)), written as a branch so that z is never
  // multiplied by zero.
  maps.stage = [g = target.g](const Vec& x, const Vec&, double z, int t) {
    return g(x) < 0.0 ? static_cast<double>(t) : z;
  };
  maps.strict.assign(static_cast<std::size_t>(horizon), 0);
  maps.bounded = true;
  return maps;
}

std::pair<StageCostSet, StoppingProbSet> min_time_stopping_data(const TargetSet& target, int horizon) {
  StageCostSet c;
  c.horizon = horizon;
  c.stage = [g = target.g](const Vec& x, const Vec&, int t) { return g(x) < 0.0 ? static_cast<double>(t) : 0.0; };
  c.terminal = [horizon](const Vec&) { return static_cast<double>(horizon); };
  StoppingProbSet p;
  p.horizon = horizon;
  p.stage = [g = target.g](const Vec& x, const Vec&, int) { return g(x) < 0.0 ? 1.0 : 0.0; };
  p.terminal = [](const Vec&) { return 1.0; };
  return {c, p};
}

ValidationReport check_total_probability(const StoppingProbSet& probs, std::span<const Trajectory> trajectories) {
  ValidationReport report;
  report.check = "total_probability";
  for (const auto& traj : trajectories) {
    ++report.samples;
    double survive = 1.0;
    double total = 0.0;
    for (std::size_t k = 0; k < traj.inputs.size(); ++k) {
      const double p = probs.stage(traj.states[k], traj.inputs[k], traj.start_stage + static_cast<int>(k));
      total += p * survive;
      survive *= 1.0 - p;
    }
    total += probs.terminal(traj.states.back()) * survive;
    if (std::abs(total - 1.0) > 1e-9) {
      report.add_violation("total stopping probability " + std::to_string(total) + " from x0=" +
                           describe(traj.states.front()));
      if (!report.counterexample) report.counterexample = traj;
    }
  }
  return report;
}

ValidationReport check_monotone(const RepMaps& maps, std::span<const MonotoneSample> samples) {
  ValidationReport report;
  report.check = "monotone:" + maps.family;
  for (const auto& s : samples) {
    ++report.samples;
    if (s.z < s.w) continue;  // outside the sampler contract
    const double hi = maps.stage(s.x, s.u, s.z, s.t);
    const double lo = maps.stage(s.x, s.u, s.w, s.t);
    if (hi < lo) {
      report.add_violation("phi_" + std::to_string(s.t) + " decreases: z=" + std::to_string(s.z) + " -> " +
                           std::to_string(hi) + ", w=" + std::to_string(s.w) + " -> " + std::to_string(lo));
    } else if (maps.strict_at(s.t) && s.z > s.w && !(hi > lo)) {
      report.add_violation("phi_" + std::to_string(s.t) + " flagged strict but flat between w=" +
                           std::to_string(s.w) + " and z=" + std::to_string(s.z));
    }
  }
  return report;
}

std::vector<MonotoneSample> sample_monotone(const Vec& lower, const Vec& upper, const InputSet& inputs, int horizon,
                                            std::size_t n, double z_lo, double z_hi, std::mt19937_64& rng) {
  std::vector<MonotoneSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    MonotoneSample s;
    s.x.resize(lower.size());
    for (std::size_t d = 0; d < lower.size(); ++d) s.x[d] = uniform(rng, lower[d], upper[d]);
    s.u = inputs[uniform_index(rng, inputs.size())];
    s.t = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(std::max(horizon, 1))));
    double a = uniform(rng, z_lo, z_hi);
    double b = uniform(rng, z_lo, z_hi);
    if (uniform_index(rng, 8) == 0) b = a;
    s.z = std::max(a, b);
    s.w = std::min(a, b);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gbe
