#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gbe/types.hpp"

namespace gbe {

enum class Lookup { kNearest, kMultilinear };

struct VecHash {
  std::size_t operator()(const Vec& v) const noexcept;
};

/// Either an explicit list of states (exact-finite) or a rectangular grid of
/// breakpoints (sampled-grid). In grid mode successor values are obtained by
/// the lookup policy; angular dimensions are periodic with period 2*pi and
/// their breakpoints must lie in [b0, b0 + 2*pi).
class StateSpace {
 public:
  static StateSpace exact(std::vector<Vec> states);
  static StateSpace grid(std::vector<std::vector<double>> breakpoints, Lookup lookup = Lookup::kMultilinear,
                         std::vector<int> angular_dims = {});
  /// `counts[d]` uniform points on [lower[d], upper[d]] (endpoint excluded
  /// for angular dimensions).
  static StateSpace uniform_grid(const Vec& lower, const Vec& upper, const std::vector<int>& counts,
                                 Lookup lookup = Lookup::kMultilinear, std::vector<int> angular_dims = {});

  bool is_exact() const { return exact_; }
  std::size_t size() const { return size_; }
  int dim() const { return dim_; }
  Lookup lookup_policy() const { return lookup_; }
  const std::vector<std::vector<double>>& breakpoints() const { return breakpoints_; }
  const std::vector<int>& angular_dims() const { return angular_dims_; }
  bool is_angular(int d) const;

  Vec state(std::size_t i) const;
  /// Exact mode only: the listed state without a copy.
  const Vec& listed_state(std::size_t i) const { return states_[i]; }
  /// Index of x if it is a listed state (exact) or exactly a grid node.
  std::optional<std::size_t> find(const Vec& x) const;
  /// Nearest node index (grid) or exact index (exact mode; throws if absent).
  std::size_t nearest(const Vec& x) const;
  /// Wraps angular coordinates into their period.
  Vec wrap(const Vec& x) const;

  /// Value of `slice` (one stage of a ValueTable) at x. Exact mode requires
  /// x to be listed. A multilinear stencil touching a +inf node with
  /// nonzero weight yields +inf.
  double lookup(std::span<const double> slice, const Vec& x) const;

  std::vector<int> grid_counts() const;

 private:
  StateSpace() = default;

  double lookup_nearest(std::span<const double> slice, const Vec& x) const;
  double lookup_multilinear(std::span<const double> slice, const Vec& x) const;

  bool exact_ = true;
  int dim_ = 0;
  std::size_t size_ = 0;
  Lookup lookup_ = Lookup::kMultilinear;

  std::vector<Vec> states_;
  std::unordered_map<Vec, std::size_t, VecHash> index_;

  std::vector<std::vector<double>> breakpoints_;
  std::vector<std::size_t> strides_;
  std::vector<int> angular_dims_;
  std::vector<char> angular_mask_;
};

/// V(x, t) for every state index and stage t = 0..T, stage-major, with the
/// first minimizing input index per entry (-1 where infeasible or t = T).
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(std::size_t num_states, int horizon);

  std::size_t num_states() const { return num_states_; }
  int horizon() const { return horizon_; }

  double value(std::size_t i, int t) const { return values_[offset(i, t)]; }
  double& value(std::size_t i, int t) { return values_[offset(i, t)]; }
  std::int32_t argmin(std::size_t i, int t) const { return argmin_[offset(i, t)]; }
  std::int32_t& argmin(std::size_t i, int t) { return argmin_[offset(i, t)]; }

  std::span<const double> stage(int t) const {
    return {values_.data() + static_cast<std::size_t>(t) * num_states_, num_states_};
  }
  std::span<double> stage(int t) { return {values_.data() + static_cast<std::size_t>(t) * num_states_, num_states_}; }

  bool operator==(const ValueTable&) const = default;

 private:
  std::size_t offset(std::size_t i, int t) const { return static_cast<std::size_t>(t) * num_states_ + i; }

  std::size_t num_states_ = 0;
  int horizon_ = 0;
  std::vector<double> values_;
  std::vector<std::int32_t> argmin_;
};

}  // namespace gbe
