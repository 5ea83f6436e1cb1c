#include "gbe/types.hpp"

#include <algorithm>
#include <string>

#include "gbe/errors.hpp"

namespace gbe {

bool RepMaps::all_strict() const {
  return static_cast<int>(strict.size()) == horizon && std::all_of(strict.begin(), strict.end(), [](char s) { return s != 0; });
}

std::optional<std::size_t> InputSet::index_of(const Vec& u) const {
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k] == u) return k;
  }
  return std::nullopt;
}

InputSet InputSet::from_points(std::vector<Vec> pts) {
  InputSet set;
  if (!pts.empty()) {
    set.lower = pts.front();
    set.upper = pts.front();
    for (const auto& p : pts) {
      for (std::size_t d = 0; d < p.size() && d < set.lower.size(); ++d) {
        set.lower[d] = std::min(set.lower[d], p[d]);
        set.upper[d] = std::max(set.upper[d], p[d]);
      }
    }
  }
  set.points = std::move(pts);
  return set;
}

InputSet InputSet::uniform(const Vec& lower, const Vec& upper, const std::vector<int>& per_dim) {
  if (lower.size() != upper.size() || lower.size() != per_dim.size()) {
    throw StructuralError("InputSet::uniform: bounds and counts differ in dimension");
  }
  const std::size_t m = lower.size();
  std::size_t total = 1;
  for (int c : per_dim) {
    if (c < 1) throw StructuralError("InputSet::uniform: counts must be positive");
    total *= static_cast<std::size_t>(c);
  }
  InputSet set;
  set.lower = lower;
  set.upper = upper;
  set.points.reserve(total);
  std::vector<int> idx(m, 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vec u(m);
    for (std::size_t d = 0; d < m; ++d) {
      u[d] = per_dim[d] == 1 ? 0.5 * (lower[d] + upper[d])
                             : lower[d] + (upper[d] - lower[d]) * idx[d] / (per_dim[d] - 1);
    }
    set.points.push_back(u);
    for (std::size_t d = m; d-- > 0;) {
      if (++idx[d] < per_dim[d]) break;
      idx[d] = 0;
    }
  }
  return set;
}

void Msop::validate() const {
  if (horizon < 0) throw StructuralError("MSOP horizon must be nonnegative");
  if (stage_sets.size() != static_cast<std::size_t>(horizon) + 1) {
    throw StructuralError("MSOP needs " + std::to_string(horizon + 1) + " stage sets, got " +
                          std::to_string(stage_sets.size()));
  }
  if (!dynamics) throw StructuralError("MSOP dynamics missing");
  if (inputs.points.empty()) throw StructuralError("MSOP input set is empty");
  if (rep_maps.horizon != horizon) {
    throw StructuralError("representation maps horizon " + std::to_string(rep_maps.horizon) +
                          " differs from MSOP horizon " + std::to_string(horizon));
  }
  for (const auto& u : inputs.points) {
    if (u.size() != inputs.lower.size() || u.size() != inputs.upper.size()) {
      throw StructuralError("input dimension differs from declared input box");
    }
    for (std::size_t d = 0; d < u.size(); ++d) {
      if (u[d] < inputs.lower[d] || u[d] > inputs.upper[d]) {
        throw StructuralError("listed input lies outside the declared input box");
      }
    }
  }
}

}  // namespace gbe
