#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace gbe {

/// State or input vector. Inline storage covers every built-in problem
/// (n <= 3, m <= 3); augmented states spill to the heap.
using Vec = boost::container::small_vector<double, 4>;

/// +inf marks a state with no feasible continuation.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

using Dynamics = std::function<Vec(const Vec& x, const Vec& u, int t)>;
using StagePredicate = std::function<bool(const Vec& x)>;
using Policy = std::function<Vec(const Vec& x, int t)>;

/// The family {phi_t} of a monotonically backward separable cost.
///
/// `stage(x, u, z, t)` is phi_t for t = 0..horizon-1 and `terminal(x)` is
/// phi_T. Callers never pass z = +inf; the solver applies the extension
/// phi_t(x, u, +inf) = +inf itself (see `apply_stage`).
struct RepMaps {
  std::string family;
  int horizon = 0;
  std::function<double(const Vec& x)> terminal;
  std::function<double(const Vec& x, const Vec& u, double z, int t)> stage;
  std::vector<char> strict;  // per stage, size horizon
  bool bounded = false;

  bool strict_at(int t) const { return t >= 0 && t < static_cast<int>(strict.size()) && strict[t] != 0; }
  bool all_strict() const;
};

inline double apply_stage(const RepMaps& maps, const Vec& x, const Vec& u, double z, int t) {
  if (z == kInfeasible) return kInfeasible;
  return maps.stage(x, u, z, t);
}

/// Finite admissible input list together with its declared bounding box.
struct InputSet {
  std::vector<Vec> points;
  Vec lower;
  Vec upper;

  std::size_t size() const { return points.size(); }
  const Vec& operator[](std::size_t k) const { return points[k]; }
  std::optional<std::size_t> index_of(const Vec& u) const;

  /// Box is the componentwise hull of the points.
  static InputSet from_points(std::vector<Vec> points);
  /// `per_dim` uniform points per dimension on [lower, upper], row-major.
  static InputSet uniform(const Vec& lower, const Vec& upper, const std::vector<int>& per_dim);
};

struct Msop {
  int horizon = 0;
  Dynamics dynamics;
  std::vector<StagePredicate> stage_sets;  // size horizon + 1
  InputSet inputs;
  RepMaps rep_maps;
  std::optional<Vec> initial_state;

  bool in_stage_set(const Vec& x, int t) const { return stage_sets[static_cast<std::size_t>(t)](x); }

  /// Throws StructuralError on stage-count or input-box violations.
  void validate() const;
};

/// Input sequence u(s..T-1) and state sequence x(s..T) starting at stage s.
struct Trajectory {
  int start_stage = 0;
  std::vector<Vec> inputs;
  std::vector<Vec> states;
  bool feasible = false;
  double cost = kInfeasible;

  int end_stage() const { return start_stage + static_cast<int>(inputs.size()); }
};

}  // namespace gbe
