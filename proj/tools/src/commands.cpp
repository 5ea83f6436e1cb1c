#include "gbe_app/commands.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "gbe/core.hpp"
#include "gbe/errors.hpp"
#include "gbe/oracle.hpp"
#include "gbe/problems.hpp"
#include "gbe/solver.hpp"
#include "gbe/version.hpp"
#include "gbe_app/instance.hpp"

namespace gbe::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json number_json(double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (double c : v) a.push_back(c);
  return a;
}

void write_manifest(const fs::path& dir, json manifest) {
  manifest["version"] = std::string(version());
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

json config_echo(const RunConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["method"] = to_string(c.method);
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  if (c.problem == "sqrt") j["horizon"] = c.horizon > 0 ? c.horizon : 10;
  if (c.problem == "lemma3") j["h"] = c.h;
  if (c.problem == "dubins" || c.problem == "path3d") {
    j["grid_scale"] = c.grid_scale;
    if (c.horizon > 0) j["horizon"] = c.horizon;
    if (c.problem == "path3d") j["moving"] = c.moving;
  }
  if (c.problem == "fthmis") {
    j["grid"] = c.grid;
    j["inputs"] = c.inputs;
    j["degree"] = c.degree;
  }
  j["lookup"] = c.lookup == Lookup::kNearest ? "nearest" : "multilinear";
  if (c.problem == "inline") j["inline"] = c.inline_spec;
  const auto grid = derived_grid(c);
  if (!grid.empty()) j["grid_points"] = grid;
  return j;
}

struct Outputs {
  json files = json::array();
  void add(const fs::path& path, const std::string& schema) {
    files.push_back({{"path", path.filename().string()}, {"schema", schema}});
  }
};

std::string trajectory_schema(std::size_t n, std::size_t m) {
  std::string s = "t,";
  for (std::size_t d = 1; d <= n; ++d) s += "x" + std::to_string(d) + ",";
  for (std::size_t d = 1; d <= m; ++d) s += "u" + std::to_string(d) + ",";
  return s + "value";
}

std::string table_schema(std::size_t n) {
  std::string s = "state_index,";
  for (std::size_t d = 1; d <= n; ++d) s += "c" + std::to_string(d) + ",";
  return s + "t,value,argmin_input";
}

std::string mask_schema(std::size_t n) {
  std::string s;
  for (std::size_t d = 1; d <= n; ++d) s += "c" + std::to_string(d) + ",";
  return s + "in_set";
}

std::size_t input_dim(const Msop& msop) { return msop.inputs.points.front().size(); }

// Planning diagnostics for one trajectory.
void describe_planning(const Instance& inst, const Trajectory& traj, json& entry) {
  if (inst.target) entry["entry_stage"] = entry_stage(*inst.target, traj);
  if (inst.obstacles) {
    double clearance = kInfeasible;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const int t = traj.start_stage + static_cast<int>(k);
      const double c = inst.obstacles->clearance(traj.states[k], t);
      clearance = std::min(clearance, c);
      if (c < 0.0) ++hits;
    }
    entry["min_clearance"] = number_json(clearance);
    entry["obstacle_hits"] = hits;
  }
}

TableOutput default_table_output(const RunConfig& c, const StateSpace& space) {
  if (c.table_output) return *c.table_output;
  return space.is_exact() ? TableOutput::kFull : TableOutput::kStage0;
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> logs(std::span<const double> v) {
  std::vector<double> out;
  for (double e : v) out.push_back(std::log(e));
  return out;
}

}  // namespace

double loglog_slope(std::span<const double> x, std::span<const double> y) { return ls_slope(logs(x), logs(y)); }

double growth_ratio(std::span<const double> x, std::span<const double> y) { return std::exp(ls_slope(x, logs(y))); }

int run(const RunConfig& config, std::ostream& log) {
  const Instance inst = build_instance(config);
  fs::create_directories(config.output);
  json manifest;
  manifest["command"] = "solve";
  manifest["config"] = config_echo(config);
  if (inst.obstacles) manifest["obstacles"] = json::parse(obstacles_to_json(*inst.obstacles));
  Outputs outputs;
  json timings;
  json results = json::array();
  const std::size_t n = inst.space.dim();
  const std::size_t m = input_dim(inst.msop);
  SolveOptions opts;
  opts.threads = config.threads;

  auto trajectory_path = [&](std::size_t k) { return config.output / ("trajectory_" + std::to_string(k) + ".csv"); };

  switch (config.method) {
    case Method::kGbe:
    case Method::kBellman: {
      ValueTable table;
      timings["solve_seconds"] = median_seconds(1, [&] {
        table = config.method == Method::kGbe ? solve_gbe(inst.msop, inst.space, opts)
                                              : solve_bellman_additive(inst.msop, *inst.additive_costs, inst.space,
                                                                       opts);
      });
      log << to_string(config.method) << ": solved " << inst.space.size() << " states x "
          << inst.msop.horizon + 1 << " stages in " << timings["solve_seconds"].get<double>() << " s\n";
      const TableOutput which = default_table_output(config, inst.space);
      if (which != TableOutput::kNone) {
        const auto path = config.output / "value_table.csv";
        write_value_table_csv(path, inst.space, table, which);
        outputs.add(path, table_schema(n));
      }
      auto value = [&](const Vec& x, int t) { return value_at(inst.msop, inst.space, table, x, t); };
      for (std::size_t k = 0; k < inst.initial_states.size(); ++k) {
        const Vec& x0 = inst.initial_states[k];
        json entry{{"initial_state", vec_json(x0)}, {"value", number_json(value(x0, 0))}};
        Trajectory traj;
        traj.states.push_back(x0);
        try {
          traj = extract_policy(inst.msop, inst.space, table, x0);
        } catch (const InfeasibleError&) {
          traj.feasible = false;
        }
        entry["feasible"] = traj.feasible;
        entry["steps"] = traj.inputs.size();
        entry["cost"] = number_json(traj.cost);
        describe_planning(inst, traj, entry);
        write_trajectory_csv(trajectory_path(k), traj, m, value);
        outputs.add(trajectory_path(k), trajectory_schema(n, m));
        results.push_back(entry);
      }
      if (inst.invariant_set) {
        const auto mask = compute_fthmis(table, inst.space);
        const auto mpath = config.output / "mask.csv";
        write_mask_csv(mpath, inst.space, mask);
        outputs.add(mpath, mask_schema(n));
        const LevelSetFit fit = fit_levelset(inst.space, table.stage(0), mask, config.degree);
        json ls{{"degree", fit.degree},
                {"exponents", fit.exponents},
                {"coefficients", fit.coefficients},
                {"residual", number_json(fit.residual)},
                {"sign_agreement", fit.sign_agreement}};
        const auto lpath = config.output / "levelset.json";
        std::ofstream(lpath, std::ios::binary) << ls.dump(2) << '\n';
        outputs.add(lpath, "json:degree,exponents,coefficients,residual,sign_agreement");
        std::size_t count = 0;
        for (char c : mask) count += c != 0;
        manifest["invariant_set"] = {{"masked_states", count}, {"states", mask.size()},
                                     {"sign_agreement", fit.sign_agreement}};
      }
      break;
    }
    case Method::kAugment: {
      AugmentedMsop aug;
      ValueTable table;
      timings["augment_seconds"] = median_seconds(1, [&] {
        aug = augment_forward_separable(inst.msop, *inst.forward, config.augment_budget);
      });
      timings["solve_seconds"] = median_seconds(1, [&] { table = solve_augmented(aug, opts); });
      manifest["augmented_states"] = aug.state_count;
      // Augmented states change dimension across stages, so no table CSV.
      const Vec& x0 = *aug.msop.initial_state;
      const Trajectory full = extract_policy(aug.msop, aug.space, table, x0);
      const Trajectory traj = project_augmented(aug, full);
      std::vector<double> values;
      for (std::size_t k = 0; k < full.states.size(); ++k) {
        values.push_back(value_at(aug.msop, aug.space, table, full.states[k], static_cast<int>(k)));
      }
      const double v0 = values.front();
      write_trajectory_csv(trajectory_path(0), traj, m,
                           [&](const Vec&, int t) { return values[static_cast<std::size_t>(t)]; });
      outputs.add(trajectory_path(0), trajectory_schema(n, m));
      results.push_back({{"initial_state", vec_json(inst.initial_states.front())},
                         {"value", number_json(v0)},
                         {"feasible", traj.feasible},
                         {"cost", number_json(traj.cost)}});
      break;
    }
    case Method::kRollout: {
      for (std::size_t k = 0; k < inst.initial_states.size(); ++k) {
        const Vec& x0 = inst.initial_states[k];
        Trajectory traj;
        timings["rollout_seconds_" + std::to_string(k)] =
            median_seconds(1, [&] { traj = rollout_policy(inst.msop, *inst.base_policy, x0); });
        RolloutEvaluator ev(inst.msop, *inst.base_policy);
        write_trajectory_csv(trajectory_path(k), traj, m, [&](const Vec& x, int t) { return ev.value(x, t); });
        outputs.add(trajectory_path(k), trajectory_schema(n, m));
        json entry{{"initial_state", vec_json(x0)},
                   {"base_value", number_json(ev.value(x0, 0))},
                   {"feasible", traj.feasible},
                   {"cost", number_json(traj.cost)}};
        describe_planning(inst, traj, entry);
        results.push_back(entry);
      }
      break;
    }
    case Method::kEnumerate: {
      const CostFunctional cost = inst.family_cost ? *inst.family_cost : rep_map_cost(inst.msop.rep_maps);
      for (std::size_t k = 0; k < inst.initial_states.size(); ++k) {
        const Vec& x0 = inst.initial_states[k];
        EnumerationResult e;
        timings["enumerate_seconds_" + std::to_string(k)] =
            median_seconds(1, [&] { e = enumerate_solve(inst.msop, x0, 0, cost, config.enumeration_budget); });
        Trajectory traj = e.feasible ? e.best : Trajectory{0, {}, {x0}, false, kInfeasible};
        write_trajectory_csv(trajectory_path(k), traj, m, [&](const Vec&, int t) {
          return e.feasible ? cost(tail_of(traj, t)) : kInfeasible;
        });
        outputs.add(trajectory_path(k), trajectory_schema(n, m));
        results.push_back({{"initial_state", vec_json(x0)},
                           {"value", number_json(e.value)},
                           {"feasible", e.feasible},
                           {"unique", e.unique},
                           {"candidates", e.candidates},
                           {"feasible_sequences", e.feasible_count}});
      }
      break;
    }
  }
  manifest["timings"] = timings;
  manifest["results"] = results;
  manifest["outputs"] = outputs.files;
  write_manifest(config.output, manifest);
  for (const auto& r : results) log << r.dump() << '\n';
  return kExitOk;
}

std::vector<BenchRow> bench_rows(const BenchSettings& s, std::size_t augment_budget, std::ostream& log) {
  std::vector<BenchRow> rows;
  std::vector<int> gbe_t = s.gbe_horizons;
  for (int t : s.compare_horizons) {
    if (std::find(gbe_t.begin(), gbe_t.end(), t) == gbe_t.end()) gbe_t.push_back(t);
  }
  for (int T : gbe_t) {
    const SqrtProblem p = sqrt_msop(T);
    double v = 0.0;
    const double secs = median_seconds(s.repeats, [&] {
      const ValueTable table = solve_gbe(p.msop, p.space);
      v = value_at(p.msop, p.space, table, *p.msop.initial_state, 0);
    });
    rows.push_back({"gbe", T, secs, v, false});
    log << "gbe T=" << T << " " << secs << " s\n";
  }
  for (int T : s.augment_horizons) {
    const SqrtProblem p = sqrt_msop(T);
    double v = 0.0;
    try {
      const double secs = median_seconds(s.repeats, [&] {
        const AugmentedMsop aug = augment_forward_separable(p.msop, p.fwd, augment_budget);
        const ValueTable table = solve_augmented(aug);
        v = value_at(aug.msop, aug.space, table, *aug.msop.initial_state, 0);
      });
      rows.push_back({"augment", T, secs, v, false});
      log << "augment T=" << T << " " << secs << " s\n";
    } catch (const ResourceError& e) {
      rows.push_back({"augment", T, 0.0, 0.0, true});
      log << "augment T=" << T << " skipped: " << e.what() << '\n';
    }
  }
  for (int T : s.rollout_horizons) {
    const SqrtProblem p = sqrt_msop(T);
    double v = 0.0;
    const double secs = median_seconds(s.repeats, [&] {
      v = rollout_policy(p.msop, sqrt_base_policy(), *p.msop.initial_state).cost;
    });
    rows.push_back({"rollout", T, secs, v, false});
    log << "rollout T=" << T << " " << secs << " s\n";
  }
  return rows;
}

int bench(const RunConfig& config, std::ostream& log) {
  fs::create_directories(config.output);
  const auto rows = bench_rows(config.bench, config.augment_budget, log);
  const auto path = config.output / "bench.csv";
  write_bench_csv(path, rows);

  json manifest;
  manifest["command"] = "bench";
  manifest["repeats"] = config.bench.repeats;
  manifest["clock"] = "steady_clock, median of repeats";
  Outputs outputs;
  outputs.add(path, "method,T,seconds,value");
  manifest["outputs"] = outputs.files;

  auto series = [&](const std::string& method, const std::vector<int>& horizons) {
    std::pair<std::vector<double>, std::vector<double>> xy;
    for (const auto& r : rows) {
      if (r.method == method && !r.skipped &&
          std::find(horizons.begin(), horizons.end(), r.horizon) != horizons.end()) {
        xy.first.push_back(r.horizon);
        xy.second.push_back(r.seconds);
      }
    }
    return xy;
  };
  json summary;
  if (auto [x, y] = series("gbe", config.bench.gbe_horizons); x.size() >= 2) summary["gbe_loglog_slope"] = loglog_slope(x, y);
  if (auto [x, y] = series("augment", config.bench.augment_horizons); x.size() >= 2) {
    summary["augment_ratio_per_T"] = growth_ratio(x, y);
  }

  // Agreement between completed methods at a common horizon.
  bool agree = true;
  std::map<int, std::vector<const BenchRow*>> by_t;
  for (const auto& r : rows) {
    if (!r.skipped) by_t[r.horizon].push_back(&r);
  }
  json disagreements = json::array();
  for (const auto& [T, rs] : by_t) {
    for (const auto* r : rs) {
      if (std::abs(r->value - rs.front()->value) > config.value_tolerance) {
        agree = false;
        disagreements.push_back({{"T", T}, {"methods", {rs.front()->method, r->method}}});
      }
    }
  }
  summary["values_agree"] = agree;
  summary["disagreements"] = disagreements;
  manifest["summary"] = summary;
  write_manifest(config.output, manifest);
  log << summary.dump() << '\n';
  return agree ? kExitOk : kExitFailure;
}

int verify(const RunConfig& config, std::ostream& log) {
  const Instance inst = build_instance(config);
  json checks = json::array();
  bool ok = true;
  auto record = [&](const std::string& name, bool passed, const std::string& detail) {
    checks.push_back({{"check", name}, {"passed", passed}, {"detail", detail}});
    log << (passed ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : ": " + detail) << '\n';
    ok = ok && passed;
  };

  SolveOptions opts;
  opts.threads = config.threads;
  ValueTable table = solve_gbe(inst.msop, inst.space, opts);
  if (config.perturb) {
    const auto& p = *config.perturb;
    if (p.state >= table.num_states() || p.stage > table.horizon()) {
      throw ConfigError("'perturb' names an entry outside the value table");
    }
    table.value(p.state, p.stage) += p.delta;
  }

  const double residual = gbe_residual(inst.msop, inst.space, table);
  record("gbe_fixed_point", residual <= config.value_tolerance, "max residual " + format_number(residual));

  if (inst.space.is_exact()) {
    const auto vf = verify_value_function(table, inst.msop, inst.space, config.enumeration_budget);
    std::string detail = std::to_string(vf.entries_checked) + " entries checked";
    if (vf.partial()) detail += ", " + std::to_string(vf.entries_skipped) + " over budget";
    if (!vf.report.violations.empty()) detail += "; " + vf.report.violations.front();
    record("value_function", vf.report.passed(), detail);

    for (const Vec& x0 : inst.initial_states) {
      const double v = value_at(inst.msop, inst.space, table, x0, 0);
      try {
        const auto e = enumerate_solve(inst.msop, x0, 0, rep_map_cost(inst.msop.rep_maps), config.enumeration_budget);
        const bool same = (v == kInfeasible && !e.feasible) || std::abs(v - e.value) <= config.value_tolerance;
        record("enumeration_equivalence", same, "V(x0,0)=" + format_number(v) + " enumerate=" + format_number(e.value));
      } catch (const ResourceError& err) {
        record("enumeration_equivalence", true, std::string("skipped: ") + err.what());
      }
    }
  }

  std::vector<Trajectory> extracted;
  for (const Vec& x0 : inst.initial_states) {
    const double v = value_at(inst.msop, inst.space, table, x0, 0);
    if (v == kInfeasible) continue;
    const Trajectory traj = extract_policy(inst.msop, inst.space, table, x0);
    extracted.push_back(traj);
    if (inst.space.is_exact()) {
      record("policy_cost", traj.feasible && std::abs(traj.cost - v) <= config.value_tolerance,
             "J(extracted)=" + format_number(traj.cost) + " V(x0,0)=" + format_number(v));
    }
  }

  // Monotonicity of the representation maps over the space's bounding box.
  {
    Vec lo = inst.space.state(0), hi = inst.space.state(0);
    for (std::size_t i = 1; i < inst.space.size(); ++i) {
      const Vec x = inst.space.state(i);
      for (std::size_t d = 0; d < x.size(); ++d) {
        lo[d] = std::min(lo[d], x[d]);
        hi[d] = std::max(hi[d], x[d]);
      }
    }
    std::mt19937_64 rng(config.seed);
    const auto samples = sample_monotone(lo, hi, inst.msop.inputs, inst.msop.horizon, 1000, 0.0, 10.0, rng);
    const auto rep = check_monotone(inst.msop.rep_maps, samples);
    record("monotone", rep.passed(),
           std::to_string(rep.samples) + " samples" + (rep.violations.empty() ? "" : "; " + rep.violations.front()));
  }

  if (inst.target && !extracted.empty()) {
    const auto data = min_time_stopping_data(*inst.target, inst.msop.horizon);
    const auto rep = check_total_probability(data.second, extracted);
    record("total_probability", rep.passed(), std::to_string(rep.samples) + " trajectories");
  }

  if (inst.space.is_exact() && inst.msop.initial_state) {
    const CostFunctional cost = inst.family_cost ? *inst.family_cost : rep_map_cost(inst.msop.rep_maps);
    try {
      const auto e = enumerate_solve(inst.msop, *inst.msop.initial_state, 0, cost, config.enumeration_budget);
      if (e.feasible) {
        const auto po = check_principle_of_optimality(inst.msop, cost, e.best, config.enumeration_budget);
        if (inst.family_cost) {
          // A cost outside the rep-map class: the check is expected to fail.
          record("principle_of_optimality_expected_failure", !po.holds,
                 po.holds ? "optimal tails were optimal everywhere"
                          : "stage " + std::to_string(po.witness_stage) + ": claimed tail " +
                                format_number(po.claimed_tail_cost) + ", better tail " +
                                format_number(po.better_tail_cost));
        } else {
          record("principle_of_optimality", po.holds,
                 po.holds ? "" : "fails at stage " + std::to_string(po.witness_stage));
        }
      }
    } catch (const ResourceError& err) {
      record("principle_of_optimality", true, std::string("skipped: ") + err.what());
    }
  }

  if (!config.output.empty()) {
    fs::create_directories(config.output);
    json manifest{{"command", "verify"}, {"config", config_echo(config)}, {"checks", checks}, {"passed", ok}};
    write_manifest(config.output, manifest);
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace gbe::app
