#include "gbe_app/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "gbe/problems.hpp"
#include "gbe_app/instance.hpp"

namespace gbe::app {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError("unknown key '" + where + "." + key + "' (expected one of: " + list + ")");
    }
  }
}

int get_int(const json& j, const std::string& key, const std::string& where, int lo) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("'" + where + "." + key + "' must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < lo || x > std::numeric_limits<int>::max()) {
    throw ConfigError("'" + where + "." + key + "' must be an integer >= " + std::to_string(lo));
  }
  return static_cast<int>(x);
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  return v.get<double>();
}

bool get_bool(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError("'" + where + "." + key + "' must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError("'" + where + "." + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<int> get_int_list(const json& j, const std::string& key, const std::string& where, int lo) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError("'" + where + "." + key + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < lo) {
      throw ConfigError("'" + where + "." + key + "' entries must be integers >= " + std::to_string(lo));
    }
    out.push_back(e.get<int>());
  }
  return out;
}

Lookup parse_lookup(const std::string& s, const std::string& where) {
  if (s == "multilinear") return Lookup::kMultilinear;
  if (s == "nearest") return Lookup::kNearest;
  throw ConfigError("'" + where + "' must be \"multilinear\" or \"nearest\"");
}

void parse_builtin(const json& p, RunConfig& c) {
  const std::string where = "problem";
  c.problem = get_string(p, "builtin", where);
  if (c.problem == "sqrt") {
    check_keys(p, {"builtin", "horizon"}, where);
    c.horizon = p.contains("horizon") ? get_int(p, "horizon", where, 1) : 10;
  } else if (c.problem == "lemma3") {
    check_keys(p, {"builtin", "h"}, where);
    if (p.contains("h")) c.h = get_number(p, "h", where);
    if (!(c.h > 0.0) || !std::isfinite(c.h)) throw ConfigError("'problem.h' must be a positive number");
  } else if (c.problem == "dubins" || c.problem == "path3d") {
    if (c.problem == "dubins") {
      check_keys(p, {"builtin", "grid_scale", "horizon", "lookup"}, where);
    } else {
      check_keys(p, {"builtin", "grid_scale", "horizon", "lookup", "moving"}, where);
      if (p.contains("moving")) c.moving = get_bool(p, "moving", where);
    }
    if (p.contains("grid_scale")) c.grid_scale = get_number(p, "grid_scale", where);
    if (!(c.grid_scale > 0.0 && c.grid_scale <= 1.0)) throw ConfigError("'problem.grid_scale' must lie in (0, 1]");
    if (p.contains("horizon")) c.horizon = get_int(p, "horizon", where, 1);
    if (p.contains("lookup")) c.lookup = parse_lookup(get_string(p, "lookup", where), "problem.lookup");
  } else if (c.problem == "fthmis") {
    check_keys(p, {"builtin", "grid", "inputs", "degree", "lookup"}, where);
    if (p.contains("grid")) c.grid = get_int(p, "grid", where, 2);
    if (p.contains("inputs")) c.inputs = get_int(p, "inputs", where, 1);
    if (p.contains("degree")) c.degree = get_int(p, "degree", where, 0);
    if (p.contains("lookup")) c.lookup = parse_lookup(get_string(p, "lookup", where), "problem.lookup");
  } else {
    throw ConfigError("'problem.builtin' must be one of sqrt, lemma3, dubins, path3d, fthmis (got '" + c.problem +
                      "')");
  }
}

void parse_bench(const json& b, BenchSettings& s) {
  const std::string where = "bench";
  check_keys(b, {"gbe", "augment", "rollout", "compare", "repeats"}, where);
  if (b.contains("gbe")) s.gbe_horizons = get_int_list(b, "gbe", where, 1);
  if (b.contains("augment")) s.augment_horizons = get_int_list(b, "augment", where, 1);
  if (b.contains("rollout")) s.rollout_horizons = get_int_list(b, "rollout", where, 1);
  if (b.contains("compare")) s.compare_horizons = get_int_list(b, "compare", where, 1);
  if (b.contains("repeats")) s.repeats = get_int(b, "repeats", where, 1);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kGbe: return "gbe";
    case Method::kBellman: return "bellman";
    case Method::kAugment: return "augment";
    case Method::kRollout: return "rollout";
    case Method::kEnumerate: return "enumerate";
  }
  return "gbe";
}

Method parse_method(const std::string& name) {
  if (name == "gbe") return Method::kGbe;
  if (name == "bellman") return Method::kBellman;
  if (name == "augment") return Method::kAugment;
  if (name == "rollout") return Method::kRollout;
  if (name == "enumerate") return Method::kEnumerate;
  throw ConfigError("'method' must be one of gbe, bellman, augment, rollout, enumerate (got '" + name + "')");
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, {"problem", "method", "threads", "seed", "output", "tolerances", "value_table", "budgets", "bench",
                   "perturb"},
             "config");
  RunConfig c;
  if (!doc.contains("problem")) throw ConfigError("missing required key 'problem'");
  const json& p = doc.at("problem");
  if (p.is_string()) {
    parse_builtin(json{{"builtin", p.get<std::string>()}}, c);
  } else if (p.is_object() && p.contains("builtin")) {
    parse_builtin(p, c);
  } else if (p.is_object() && p.contains("inline")) {
    check_keys(p, {"inline"}, "problem");
    c.problem = "inline";
    c.inline_spec = p.at("inline");
    validate_inline(c.inline_spec);
  } else {
    throw ConfigError("'problem' must be a builtin name, {\"builtin\": ...} or {\"inline\": {...}}");
  }

  if (doc.contains("method")) c.method = parse_method(get_string(doc, "method", "config"));
  if (doc.contains("threads")) c.threads = get_int(doc, "threads", "config", 1);
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned()) throw ConfigError("'config.seed' must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
    c.seed_set = true;
  }
  if (doc.contains("output")) c.output = get_string(doc, "output", "config");
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    check_keys(t, {"value"}, "tolerances");
    if (t.contains("value")) c.value_tolerance = get_number(t, "value", "tolerances");
    if (!(c.value_tolerance >= 0.0)) throw ConfigError("'tolerances.value' must be non-negative");
  }
  if (doc.contains("value_table")) {
    const std::string v = get_string(doc, "value_table", "config");
    if (v == "full") {
      c.table_output = TableOutput::kFull;
    } else if (v == "stage0") {
      c.table_output = TableOutput::kStage0;
    } else if (v == "none") {
      c.table_output = TableOutput::kNone;
    } else {
      throw ConfigError("'config.value_table' must be \"full\", \"stage0\" or \"none\"");
    }
  }
  if (doc.contains("budgets")) {
    const json& b = doc.at("budgets");
    check_keys(b, {"augment", "enumerate"}, "budgets");
    if (b.contains("augment")) c.augment_budget = static_cast<std::size_t>(get_int(b, "augment", "budgets", 1));
    if (b.contains("enumerate")) {
      c.enumeration_budget = static_cast<std::size_t>(get_int(b, "enumerate", "budgets", 1));
    }
  }
  if (doc.contains("bench")) parse_bench(doc.at("bench"), c.bench);
  if (doc.contains("perturb")) {
    const json& q = doc.at("perturb");
    check_keys(q, {"state", "t", "delta"}, "perturb");
    Perturbation pert;
    pert.state = static_cast<std::size_t>(get_int(q, "state", "perturb", 0));
    pert.stage = get_int(q, "t", "perturb", 0);
    if (q.contains("delta")) pert.delta = get_number(q, "delta", "perturb");
    c.perturb = pert;
  }
  check_compatibility(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void check_compatibility(const RunConfig& c) {
  const Capabilities caps = capabilities(c);
  switch (c.method) {
    case Method::kBellman:
      if (caps.family != "additive") {
        throw ConfigError("method 'bellman' requires the additive cost family, but the problem uses '" + caps.family +
                          "'");
      }
      break;
    case Method::kAugment:
      if (!caps.forward) throw ConfigError("method 'augment' requires forward-separable maps; '" + c.problem +
                                           "' provides none");
      break;
    case Method::kRollout:
      if (!caps.base_policy) throw ConfigError("method 'rollout' requires a base policy; '" + c.problem +
                                               "' provides none");
      break;
    case Method::kEnumerate:
      if (!caps.exact) throw ConfigError("method 'enumerate' requires an exact-finite state space");
      break;
    case Method::kGbe: break;
  }
}

void apply_budget_env(RunConfig& c) {
  const char* env = std::getenv("GBE_BUDGET");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) throw ConfigError("GBE_BUDGET must be a positive integer");
  c.augment_budget = static_cast<std::size_t>(v);
  c.enumeration_budget = static_cast<std::size_t>(v);
}

std::vector<int> derived_grid(const RunConfig& c) {
  if (c.problem == "dubins") {
    const int n = scaled_resolution(60, c.grid_scale);
    return {n, n, n};
  }
  if (c.problem == "path3d") {
    const int n = scaled_resolution(40, c.grid_scale);
    return {n, n, n};
  }
  if (c.problem == "fthmis") return {c.grid, c.grid};
  if (c.problem == "inline" && c.inline_spec.contains("grid")) {
    return c.inline_spec.at("grid").at("counts").get<std::vector<int>>();
  }
  return {};
}

}  // namespace gbe::app
