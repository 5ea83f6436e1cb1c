#include "gbe_app/output.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace gbe::app {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string coord_header(const char* prefix, std::size_t n) {
  std::string h;
  for (std::size_t d = 0; d < n; ++d) h += std::string(prefix) + std::to_string(d + 1) + ",";
  return h;
}

}  // namespace

std::string format_number(double v) {
  if (v == kInfeasible) return "inf";
  if (v == -kInfeasible) return "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, std::size_t input_dim,
                          const std::function<double(const Vec&, int)>& value) {
  auto out = open_out(path);
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t," << coord_header("x", n) << coord_header("u", input_dim) << "value\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const int t = traj.start_stage + static_cast<int>(k);
    out << t << ',';
    for (double c : traj.states[k]) out << format_number(c) << ',';
    for (std::size_t d = 0; d < input_dim; ++d) {
      if (k < traj.inputs.size()) out << format_number(traj.inputs[k][d]);
      out << ',';
    }
    out << format_number(value(traj.states[k], t)) << '\n';
  }
}

void write_value_table_csv(const std::filesystem::path& path, const StateSpace& space, const ValueTable& table,
                           TableOutput which) {
  auto out = open_out(path);
  const Vec first = space.size() > 0 ? space.state(0) : Vec{};
  out << "state_index," << coord_header("c", first.size()) << "t,value,argmin_input\n";
  const int last = which == TableOutput::kFull ? table.horizon() : 0;
  std::string line;
  for (int t = 0; t <= last; ++t) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      line.clear();
      line += std::to_string(i);
      line += ',';
      for (double c : space.state(i)) {
        line += format_number(c);
        line += ',';
      }
      line += std::to_string(t);
      line += ',';
      line += format_number(table.value(i, t));
      line += ',';
      line += std::to_string(table.argmin(i, t));
      line += '\n';
      out << line;
    }
  }
}

void write_mask_csv(const std::filesystem::path& path, const StateSpace& space, const std::vector<char>& mask) {
  auto out = open_out(path);
  const Vec first = space.size() > 0 ? space.state(0) : Vec{};
  out << coord_header("c", first.size()) << "in_set\n";
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (double c : space.state(i)) out << format_number(c) << ',';
    out << (mask[i] ? 1 : 0) << '\n';
  }
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  auto out = open_out(path);
  out << "method,T,seconds,value\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.horizon << ',';
    if (r.skipped) {
      out << "skipped,skipped\n";
    } else {
      out << format_number(r.seconds) << ',' << format_number(r.value) << '\n';
    }
  }
}

}  // namespace gbe::app
