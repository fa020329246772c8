#include "graflow/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace graflow {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_flow_csv(const GraphFlow& flow, const std::string& path) {
  const SpaceTimeGrid& grid = flow.grid();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int d = 0; d < grid.dim(); ++d) out << "axis" << d << ",";
  out << "t,component,value\n";

  std::string line;
  for (int ti = 0; ti < grid.num_times(); ++ti) {
    const std::string t_str = format_g17(grid.time(ti));
    for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
      const Eigen::VectorXd x = grid.node_point(node);
      std::string prefix;
      for (int d = 0; d < grid.dim(); ++d) prefix += format_g17(x(d)) + ",";
      prefix += t_str;
      for (int a = 0; a < grid.codim(); ++a) {
        out << prefix << ',' << a << ',' << format_g17(flow.value(ti, node, a)) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("write failure on " + path);
}

namespace {

int axis_index(const SpaceTimeGrid& grid, int axis, double coord, const std::string& where) {
  const double pos = (coord - grid.axis(axis).lo) / grid.spacing();
  const double r = std::round(pos);
  if (std::abs(pos - r) > 1e-6 || r < 0 || r >= grid.nodes_per_axis(axis))
    throw std::runtime_error("flow dump: coordinate " + format_g17(coord) + " on axis " +
                             std::to_string(axis) + " is not a grid node (" + where + ")");
  return static_cast<int>(r);
}

}  // namespace

GraphFlow load_flow_csv(const SpaceTimeGrid& grid, BoundaryPolicy policy,
                        const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open flow dump: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("flow dump is empty: " + path);
  {
    std::ostringstream expected;
    for (int d = 0; d < grid.dim(); ++d) expected << "axis" << d << ",";
    expected << "t,component,value";
    if (header != expected.str())
      throw std::runtime_error("flow dump header mismatch: expected '" + expected.str() +
                               "', got '" + header + "'");
  }

  GraphFlow flow(grid, policy);
  std::vector<char> seen(
      static_cast<std::size_t>(grid.num_times()) * grid.num_nodes() * grid.codim(), 0);

  std::string line;
  std::size_t lineno = 1;
  std::vector<int> multi(grid.dim());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const char* p = line.c_str();
    auto next_field = [&](bool last) -> double {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw std::runtime_error("flow dump: malformed number at " + where);
      p = end;
      if (!last) {
        if (*p != ',') throw std::runtime_error("flow dump: expected ',' at " + where);
        ++p;
      }
      return v;
    };

    for (int d = 0; d < grid.dim(); ++d) multi[d] = axis_index(grid, d, next_field(false), where);
    const double t = next_field(false);
    const double comp_raw = next_field(false);
    const double value = next_field(true);
    if (*p != '\0' && *p != '\r')
      throw std::runtime_error("flow dump: trailing characters at " + where);

    const double tpos = (t - grid.t_start()) / grid.dt();
    const double tr = std::round(tpos);
    if (std::abs(tpos - tr) > 1e-6 || tr < 0 || tr >= grid.num_times())
      throw std::runtime_error("flow dump: time " + format_g17(t) + " is not a stored slice (" +
                               where + ")");
    const int ti = static_cast<int>(tr);
    const int comp = static_cast<int>(comp_raw);
    if (comp < 0 || comp >= grid.codim() || comp != comp_raw)
      throw std::runtime_error("flow dump: bad component index at " + where);
    if (!std::isfinite(value)) {
      std::ostringstream os;
      os << "flow dump: non-finite value at node (";
      for (int d = 0; d < grid.dim(); ++d) os << (d ? "," : "") << grid.coord(d, multi[d]);
      os << "), t=" << format_g17(t) << ", component " << comp << " (" << where << ")";
      throw std::runtime_error(os.str());
    }

    const std::size_t node = grid.node_index(multi);
    const std::size_t cell =
        (static_cast<std::size_t>(ti) * grid.num_nodes() + node) * grid.codim() + comp;
    if (seen[cell]) throw std::runtime_error("flow dump: duplicate entry at " + where);
    seen[cell] = 1;
    flow.value(ti, node, comp) = value;
  }

  for (std::size_t c = 0; c < seen.size(); ++c)
    if (!seen[c])
      throw std::runtime_error("flow dump is incomplete: expected " +
                               std::to_string(seen.size()) + " entries");
  return flow;
}

}  // namespace graflow
