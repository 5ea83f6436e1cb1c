#pragma once

#include <algorithm>
#include <chrono>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbe_app/config.hpp"
#include "gbe_app/output.hpp"

namespace gbe::app {

/// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // solver error or failed check
inline constexpr int kExitConfig = 2;

/// Solves the configured problem and writes the value table, trajectories,
/// masks/level sets and manifest.json into config.output.
int run(const RunConfig& config, std::ostream& log);

/// Timing sweep of gbe, augment and rollout on the nested-radical problem; writes bench.csv and
/// manifest.json. Fails when completed methods disagree at a common T.
int bench(const RunConfig& config, std::ostream& log);

/// Runs the oracle checks that apply to the configured problem. Expected
/// failures (the principle-of-optimality counterexample) count as passes.
int verify(const RunConfig& config, std::ostream& log);

/// Median wall time over `repeats` calls of `fn`, on a monotonic clock.
template <typename Fn>
double median_seconds(int repeats, Fn&& fn);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// exp of the least-squares slope of log(y) against x: the growth factor per unit x.
double growth_ratio(std::span<const double> x, std::span<const double> y);

/// Bench rows computed without touching the filesystem.
std::vector<BenchRow> bench_rows(const BenchSettings& settings, std::size_t augment_budget, std::ostream& log);

template <typename Fn>
double median_seconds(int repeats, Fn&& fn) {
  std::vector<double> times;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace gbe::app
