#include "gbe/state_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "gbe/errors.hpp"

namespace gbe {
namespace {

constexpr double kPeriod = 2.0 * std::numbers::pi;

struct Bracket {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double frac = 0.0;  // weight of `hi`
};

}  // namespace

std::size_t VecHash::operator()(const Vec& v) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL ^ v.size();
  for (double d : v) {
    auto bits = std::bit_cast<std::uint64_t>(d + 0.0);  // folds -0.0 into +0.0
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

StateSpace StateSpace::exact(std::vector<Vec> states) {
  StateSpace s;
  s.exact_ = true;
  s.size_ = states.size();
  s.dim_ = states.empty() ? 0 : static_cast<int>(states.front().size());
  s.index_.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (auto& c : states[i]) c += 0.0;
    if (!s.index_.emplace(states[i], i).second) {
      throw StructuralError("exact state list contains a duplicate state at index " + std::to_string(i));
    }
  }
  s.states_ = std::move(states);
  return s;
}

StateSpace StateSpace::grid(std::vector<std::vector<double>> breakpoints, Lookup lookup, std::vector<int> angular_dims) {
  StateSpace s;
  s.exact_ = false;
  s.lookup_ = lookup;
  s.dim_ = static_cast<int>(breakpoints.size());
  if (s.dim_ == 0) throw StructuralError("grid needs at least one dimension");
  s.angular_mask_.assign(breakpoints.size(), 0);
  for (int d : angular_dims) {
    if (d < 0 || d >= s.dim_) throw StructuralError("angular dimension out of range");
    s.angular_mask_[static_cast<std::size_t>(d)] = 1;
  }
  std::size_t total = 1;
  s.strides_.assign(breakpoints.size(), 1);
  for (std::size_t d = breakpoints.size(); d-- > 0;) {
    const auto& b = breakpoints[d];
    if (b.empty()) throw StructuralError("grid dimension " + std::to_string(d) + " has no breakpoints");
    for (std::size_t k = 1; k < b.size(); ++k) {
      if (!(b[k] > b[k - 1])) {
        throw StructuralError("grid breakpoints must be strictly increasing (dimension " + std::to_string(d) + ")");
      }
    }
    if (s.angular_mask_[d] && b.back() - b.front() >= kPeriod) {
      throw StructuralError("angular breakpoints must span less than one period");
    }
    // Row-major with the first dimension slowest.
    s.strides_[d] = total;
    total *= b.size();
  }
  s.size_ = total;
  s.breakpoints_ = std::move(breakpoints);
  s.angular_dims_ = std::move(angular_dims);
  return s;
}

StateSpace StateSpace::uniform_grid(const Vec& lower, const Vec& upper, const std::vector<int>& counts, Lookup lookup,
                                    std::vector<int> angular_dims) {
  if (lower.size() != upper.size() || lower.size() != counts.size()) {
    throw StructuralError("uniform_grid: bounds and counts differ in dimension");
  }
  std::vector<std::vector<double>> bps(counts.size());
  for (std::size_t d = 0; d < counts.size(); ++d) {
    const bool angular = std::find(angular_dims.begin(), angular_dims.end(), static_cast<int>(d)) != angular_dims.end();
    const int n = counts[d];
    if (n < 1) throw StructuralError("uniform_grid: counts must be positive");
    bps[d].resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      if (n == 1) {
        bps[d][0] = lower[d];
      } else if (angular) {
        bps[d][static_cast<std::size_t>(k)] = lower[d] + (upper[d] - lower[d]) * k / n;
      } else {
        bps[d][static_cast<std::size_t>(k)] = lower[d] + (upper[d] - lower[d]) * k / (n - 1);
      }
    }
  }
  return grid(std::move(bps), lookup, std::move(angular_dims));
}

bool StateSpace::is_angular(int d) const {
  return !exact_ && d >= 0 && d < dim_ && angular_mask_[static_cast<std::size_t>(d)] != 0;
}

std::vector<int> StateSpace::grid_counts() const {
  std::vector<int> out;
  for (const auto& b : breakpoints_) out.push_back(static_cast<int>(b.size()));
  return out;
}

Vec StateSpace::state(std::size_t i) const {
  if (exact_) return states_[i];
  Vec x(static_cast<std::size_t>(dim_));
  for (std::size_t d = 0; d < breakpoints_.size(); ++d) {
    x[d] = breakpoints_[d][(i / strides_[d]) % breakpoints_[d].size()];
  }
  return x;
}

Vec StateSpace::wrap(const Vec& x) const {
  if (exact_ || angular_dims_.empty()) return x;
  Vec y = x;
  for (int d : angular_dims_) {
    const double base = breakpoints_[static_cast<std::size_t>(d)].front();
    double c = std::fmod(y[static_cast<std::size_t>(d)] - base, kPeriod);
    if (c < 0) c += kPeriod;
    if (c >= kPeriod) c = 0.0;
    y[static_cast<std::size_t>(d)] = base + c;
  }
  return y;
}

std::optional<std::size_t> StateSpace::find(const Vec& x) const {
  if (exact_) {
    auto it = index_.find(x);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  if (static_cast<int>(x.size()) != dim_) return std::nullopt;
  const Vec y = wrap(x);
  std::size_t idx = 0;
  for (std::size_t d = 0; d < breakpoints_.size(); ++d) {
    const auto& b = breakpoints_[d];
    auto it = std::lower_bound(b.begin(), b.end(), y[d]);
    if (it == b.end() || *it != y[d]) return std::nullopt;
    idx += static_cast<std::size_t>(it - b.begin()) * strides_[d];
  }
  return idx;
}

namespace {

Bracket bracket(const std::vector<double>& b, double c, bool angular) {
  Bracket br;
  const std::size_t n = b.size();
  if (n == 1) return br;
  if (angular && c >= b.back()) {
    br.lo = n - 1;
    br.hi = 0;
    const double span = b.front() + kPeriod - b.back();
    br.frac = (c - b.back()) / span;
    return br;
  }
  if (c <= b.front()) return br;
  if (c >= b.back()) {
    br.lo = br.hi = n - 1;
    return br;
  }
  auto it = std::upper_bound(b.begin(), b.end(), c);
  br.hi = static_cast<std::size_t>(it - b.begin());
  br.lo = br.hi - 1;
  br.frac = (c - b[br.lo]) / (b[br.hi] - b[br.lo]);
  return br;
}

}  // namespace

std::size_t StateSpace::nearest(const Vec& x) const {
  if (exact_) {
    auto it = index_.find(x);
    if (it == index_.end()) throw ContractError("state is not listed in the exact state space");
    return it->second;
  }
  const Vec y = wrap(x);
  std::size_t idx = 0;
  for (std::size_t d = 0; d < breakpoints_.size(); ++d) {
    const Bracket br = bracket(breakpoints_[d], y[d], angular_mask_[d] != 0);
    idx += (br.frac > 0.5 ? br.hi : br.lo) * strides_[d];
  }
  return idx;
}

double StateSpace::lookup(std::span<const double> slice, const Vec& x) const {
  if (exact_) {
    auto it = index_.find(x);
    if (it == index_.end()) throw ContractError("successor state is not listed in the exact state space");
    return slice[it->second];
  }
  return lookup_ == Lookup::kNearest ? lookup_nearest(slice, x) : lookup_multilinear(slice, x);
}

double StateSpace::lookup_nearest(std::span<const double> slice, const Vec& x) const { return slice[nearest(x)]; }

double StateSpace::lookup_multilinear(std::span<const double> slice, const Vec& x) const {
  const Vec y = wrap(x);
  const std::size_t dims = breakpoints_.size();
  boost::container::small_vector<Bracket, 4> brs(dims);
  for (std::size_t d = 0; d < dims; ++d) brs[d] = bracket(breakpoints_[d], y[d], angular_mask_[d] != 0);

  double acc = 0.0;
  const std::size_t corners = std::size_t{1} << dims;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t idx = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      const bool upper = (mask >> d) & 1U;
      w *= upper ? brs[d].frac : 1.0 - brs[d].frac;
      idx += (upper ? brs[d].hi : brs[d].lo) * strides_[d];
    }
    if (w == 0.0) continue;
    const double v = slice[idx];
    if (v == kInfeasible) return kInfeasible;
    acc += w * v;
  }
  return acc;
}

ValueTable::ValueTable(std::size_t num_states, int horizon)
    : num_states_(num_states),
      horizon_(horizon),
      values_(num_states * (static_cast<std::size_t>(horizon) + 1), kInfeasible),
      argmin_(num_states * (static_cast<std::size_t>(horizon) + 1), -1) {}

}  // namespace gbe
