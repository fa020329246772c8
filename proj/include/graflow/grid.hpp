#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graflow/common.hpp"

namespace graflow {

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  double span() const { return hi - lo; }
};

enum class BoundaryPolicy { kDirichletExact, kDirichletFrozen };

const char* to_string(BoundaryPolicy p);

/// Uniform space-time grid over a box in R^k: one spatial spacing h for all
/// axes, one time step dt. Node coordinates are lo + i*h; stored times are
/// t_start + ti*dt.
class SpaceTimeGrid {
 public:
  /// Exact constructor: every axis span must be an integer multiple of h and
  /// the time span an integer multiple of dt (1e-9 relative), at least 5
  /// nodes per spatial axis. Throws std::invalid_argument otherwise.
  SpaceTimeGrid(int k, int codim, std::vector<AxisRange> box, double h, double t_start,
                double t_end, double dt);

  /// Snapping factory for target spacings: the cell count per axis is
  /// round(span/h) (>= 4) and the time step count ceil(span/dt) so the
  /// actual dt never exceeds the target (keeps explicit CFL valid).
  static SpaceTimeGrid with_target_spacing(int k, int codim, std::vector<AxisRange> box,
                                           double h_target, double t_start, double t_end,
                                           double dt_target);

  int dim() const { return k_; }
  int codim() const { return codim_; }
  int ambient_dim() const { return k_ + codim_; }
  double spacing() const { return h_; }
  double dt() const { return dt_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  int num_times() const { return num_times_; }
  double time(int ti) const { return t_start_ + ti * dt_; }
  const AxisRange& axis(int d) const { return box_[d]; }

  int nodes_per_axis(int d) const { return counts_[d]; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t stride(int d) const { return strides_[d]; }

  double coord(int axis, int i) const { return box_[axis].lo + i * h_; }
  /// Multi-index of a flat node index (row-major, last axis fastest).
  std::vector<int> node_multi(std::size_t idx) const;
  std::size_t node_index(const std::vector<int>& multi) const;
  Eigen::VectorXd node_point(std::size_t idx) const;

  bool is_face_node(std::size_t idx) const;
  /// True when every axis index is in [1, N-2].
  bool is_interior(std::size_t idx) const;

  /// h^k times the per-axis trapezoid end factors (1/2 on box faces).
  double quad_weight(std::size_t idx) const;

  /// Nearest stored time index; throws if t is not a grid time (1e-9 rel).
  int time_index(double t) const;

 private:
  int k_ = 0;
  int codim_ = 0;
  std::vector<AxisRange> box_;
  double h_ = 0.0;
  double t_start_ = 0.0, t_end_ = 0.0, dt_ = 0.0;
  int num_times_ = 0;
  std::vector<int> counts_;
  std::vector<std::size_t> strides_;
  std::size_t num_nodes_ = 0;
};

/// One derived field on the nodes of a grid at a single time: `ncomp` values
/// per node. Component meaning is fixed by the producing operation.
struct FieldSample {
  std::size_t num_nodes = 0;
  int ncomp = 0;
  std::vector<double> data;

  FieldSample() = default;
  FieldSample(std::size_t nodes, int comps)
      : num_nodes(nodes), ncomp(comps), data(nodes * comps, 0.0) {}

  double at(std::size_t node, int c) const { return data[node * ncomp + c]; }
  double& at(std::size_t node, int c) { return data[node * ncomp + c]; }
};

/// Sampled graph function on a space-time grid: codim components per node
/// per stored time, laid out time-major then row-major then component.
class GraphFlow {
 public:
  GraphFlow(SpaceTimeGrid grid, BoundaryPolicy policy);

  const SpaceTimeGrid& grid() const { return grid_; }
  BoundaryPolicy boundary_policy() const { return policy_; }

  double value(int ti, std::size_t node, int comp) const {
    return values_[(static_cast<std::size_t>(ti) * grid_.num_nodes() + node) * grid_.codim() +
                   comp];
  }
  double& value(int ti, std::size_t node, int comp) {
    return values_[(static_cast<std::size_t>(ti) * grid_.num_nodes() + node) * grid_.codim() +
                   comp];
  }

  const double* slice(int ti) const {
    return values_.data() + static_cast<std::size_t>(ti) * grid_.num_nodes() * grid_.codim();
  }
  double* slice(int ti) {
    return values_.data() + static_cast<std::size_t>(ti) * grid_.num_nodes() * grid_.codim();
  }

  FieldSample slice_sample(int ti) const;
  void set_slice(int ti, const FieldSample& s);

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// NaN/Inf scan; throws std::runtime_error naming the first offending
  /// node's coordinates and time.
  void check_finite() const;

 private:
  SpaceTimeGrid grid_;
  BoundaryPolicy policy_;
  std::vector<double> values_;
};

/// Spatial region selector with the node-center rule: a node belongs to the
/// region iff its center does. Ball masks clip boundary cells, which is an
/// accepted O(h) region error; `clips(grid)` reports whether any in-box node
/// is excluded.
struct RegionMask {
  enum class Kind { kFull, kBall, kBox };
  Kind kind = Kind::kFull;
  Eigen::VectorXd center;
  double radius = 0.0;
  std::vector<AxisRange> bounds;

  static RegionMask full();
  static RegionMask ball(Eigen::VectorXd center, double radius);
  static RegionMask box(std::vector<AxisRange> bounds);

  bool contains(const Eigen::VectorXd& x) const;
  bool clips(const SpaceTimeGrid& grid) const;
};

/// Closed time window [t_lo, t_hi] used by norms and space-time integrals.
struct TimeWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

}  // namespace graflow
