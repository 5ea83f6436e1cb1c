#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gbe/state_space.hpp"
#include "gbe/types.hpp"
#include "gbe_app/config.hpp"

namespace gbe::app {

/// Shortest round-trip decimal form; "inf" for +infinity.
std::string format_number(double v);

/// Writes `t,x1..xn,u1..um,value`. The final row leaves the input columns
/// empty. `value(x, t)` supplies the value column.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, std::size_t input_dim,
                          const std::function<double(const Vec&, int)>& value);

/// Writes `state_index,c1..cn,t,value,argmin_input` for the selected stages.
void write_value_table_csv(const std::filesystem::path& path, const StateSpace& space, const ValueTable& table,
                           TableOutput which);

/// Writes `c1..cn,in_set` over the space.
void write_mask_csv(const std::filesystem::path& path, const StateSpace& space, const std::vector<char>& mask);

struct BenchRow {
  std::string method;
  int horizon = 0;
  double seconds = 0.0;  // negative when skipped
  double value = 0.0;
  bool skipped = false;
};

/// Writes `method,T,seconds,value`; skipped rows carry "skipped" in both
/// numeric columns.
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);

}  // namespace gbe::app
