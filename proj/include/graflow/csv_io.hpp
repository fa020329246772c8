#pragma once

#include <string>

#include "graflow/grid.hpp"

namespace graflow {

/// Shortest exact decimal form that round-trips a double (printf %.17g).
std::string format_g17(double v);

/// Field dump: header `axis0,...,axis{k-1},t,component,value`, rows in
/// time-major, row-major, component-minor order, 17 significant digits so
/// dump -> load is bit exact.
void dump_flow_csv(const GraphFlow& flow, const std::string& path);

/// Loads a dump back onto `grid`. Throws std::runtime_error naming the
/// offending row/coordinates on shape mismatches, unknown nodes, duplicate or
/// missing entries, and non-finite values.
GraphFlow load_flow_csv(const SpaceTimeGrid& grid, BoundaryPolicy policy,
                        const std::string& path);

}  // namespace graflow
