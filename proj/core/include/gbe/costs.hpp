#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gbe/types.hpp"

namespace gbe {

/// Per-stage costs c_t(x, u) for t < T and terminal cost c_T(x).
struct StageCostSet {
  int horizon = 0;
  std::function<double(const Vec& x, const Vec& u, int t)> stage;
  std::function<double(const Vec& x)> terminal;
  bool bounded = true;
};

/// Stopping probabilities p_t(x, u) in [0, 1] for t < T and p_T(x).
struct StoppingProbSet {
  int horizon = 0;
  std::function<double(const Vec& x, const Vec& u, int t)> stage;
  std::function<double(const Vec& x)> terminal;
};

/// S = {x : g(x) < 0}.
struct TargetSet {
  std::function<double(const Vec& x)> g;
  bool contains(const Vec& x) const { return g(x) < 0.0; }

  /// Open axis-aligned box {x : |x_d - center_d| < half_width} via
  /// g(x) = max_d |x_d - center_d| - half_width over the listed dimensions.
  static TargetSet open_box(Vec center, double half_width);
};

/// Quadrature over a scalar noise domain I: nodes and weights such that
/// sum_k w_k h(node_k) approximates the integral of h over I.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Deterministic noise at w = 0; every integral collapses to evaluation.
  static QuadratureRule point_mass(double at = 0.0);
  /// 20-point Gauss-Legendre rule on [a, b].
  static QuadratureRule gauss_legendre(double a, double b);
};

/// Multiplicative cost E_w[c_T(x(T), w) * prod_t c_t(x(t), u(t), w)] with
/// densities p_t and p_T over the noise domains.
struct MultiplicativeCostSet {
  int horizon = 0;
  std::function<double(const Vec& x, const Vec& u, double w, int t)> stage;
  std::function<double(const Vec& x, double w)> terminal;
  std::function<double(const Vec& x, const Vec& u, double w, int t)> density;
  std::function<double(const Vec& x, double w)> terminal_density;
  QuadratureRule stage_rule = QuadratureRule::point_mass();
  QuadratureRule terminal_rule = QuadratureRule::point_mass();
  bool bounded = true;

  /// Point-mass noise with unit density: phi_t = z * c_t(x, u).
  static MultiplicativeCostSet deterministic(const StageCostSet& costs);
};

/// A state/input pair at a stage, used to validate map attributes.
struct StageSample {
  Vec x;
  Vec u;
  int t = 0;
};

/// (x, u, t) with continuation values z >= w.
struct MonotoneSample {
  Vec x;
  Vec u;
  int t = 0;
  double z = 0.0;
  double w = 0.0;
};

struct ValidationReport {
  std::string check;
  std::size_t samples = 0;
  std::size_t violation_count = 0;
  std::vector<std::string> violations;  // first few, human readable
  std::optional<Trajectory> counterexample;

  bool passed() const { return violation_count == 0; }
  void add_violation(std::string message);
};

RepMaps additive_maps(const StageCostSet& costs);
RepMaps max_maps(const StageCostSet& costs);

/// Validates normalization of every density at `samples` to 1e-6 and sets
/// per-stage strictness from the sampled integrals of p_t * c_t. Throws
/// ValidationError on an unnormalized density or a negative stage cost.
RepMaps multiplicative_maps(const MultiplicativeCostSet& costs, std::span<const StageSample> samples);

/// Strictness per stage holds iff p_t != 1 on every sample at that stage.
/// If p_T != 1 at any sampled state, `trajectories` must be supplied and
/// pass check_total_probability, otherwise ValidationError is thrown.
RepMaps stopped_additive_maps(const StageCostSet& costs, const StoppingProbSet& probs,
                              std::span<const StageSample> samples, std::span<const Trajectory> trajectories = {});

/// J = min{first stage with x(t) in S, T}.
RepMaps min_time_maps(const TargetSet& target, int horizon);

/// The stopped-additive data that realizes min_time_maps: c_t = t * 1_S(x),
/// p_t = 1_S(x), c_T = T, p_T = 1.
std::pair<StageCostSet, StoppingProbSet> min_time_stopping_data(const TargetSet& target, int horizon);

/// Checks sum_t p_t prod_{i<t}(1 - p_i) + p_T prod_{i<T}(1 - p_i) = 1 to
/// 1e-9 along each trajectory; the first failing trajectory is kept.
ValidationReport check_total_probability(const StoppingProbSet& probs, std::span<const Trajectory> trajectories);

/// phi_t(x,u,z) >= phi_t(x,u,w) for z >= w, and strict inequality for z > w
/// on stages flagged strict.
ValidationReport check_monotone(const RepMaps& maps, std::span<const MonotoneSample> samples);

/// Uniform samples over a state box, a listed input set and stages, with
/// continuation pairs drawn from [z_lo, z_hi] and ordered so z >= w.
/// Roughly one in eight samples has z == w.
std::vector<MonotoneSample> sample_monotone(const Vec& lower, const Vec& upper, const InputSet& inputs, int horizon,
                                            std::size_t n, double z_lo, double z_hi, std::mt19937_64& rng);

}  // namespace gbe
