#include "graflow/grid.hpp"

#include <cmath>
#include <sstream>

namespace graflow {

namespace {

bool near_integer(double x, double tol, long long* out) {
  const double r = std::round(x);
  if (std::abs(x - r) > tol * std::max(1.0, std::abs(x))) return false;
  *out = static_cast<long long>(r);
  return true;
}

}  // namespace

const char* to_string(BoundaryPolicy p) {
  switch (p) {
    case BoundaryPolicy::kDirichletExact: return "dirichlet-exact";
    case BoundaryPolicy::kDirichletFrozen: return "dirichlet-frozen";
  }
  return "?";
}

SpaceTimeGrid::SpaceTimeGrid(int k, int codim, std::vector<AxisRange> box, double h,
                             double t_start, double t_end, double dt)
    : k_(k), codim_(codim), box_(std::move(box)), h_(h), t_start_(t_start), t_end_(t_end),
      dt_(dt) {
  if (k_ < 1 || codim_ < 1) throw std::invalid_argument("grid needs k >= 1 and codim >= 1");
  if (static_cast<int>(box_.size()) != k_)
    throw std::invalid_argument("grid box must have one range per spatial axis");
  if (!(h_ > 0.0) || !(dt_ > 0.0)) throw std::invalid_argument("grid spacings must be positive");
  if (!(t_end_ >= t_start_)) throw std::invalid_argument("grid needs t_end >= t_start");

  counts_.resize(k_);
  for (int d = 0; d < k_; ++d) {
    if (!(box_[d].hi > box_[d].lo)) throw std::invalid_argument("grid box axis has empty span");
    long long cells = 0;
    if (!near_integer(box_[d].span() / h_, 1e-9, &cells))
      throw std::invalid_argument("grid box span is not an integer multiple of h");
    counts_[d] = static_cast<int>(cells) + 1;
    if (counts_[d] < 5)
      throw std::invalid_argument("grid too small for stencil: need >= 5 nodes per axis");
  }
  long long steps = 0;
  if (!near_integer((t_end_ - t_start_) / dt_, 1e-9, &steps))
    throw std::invalid_argument("time span is not an integer multiple of dt");
  num_times_ = static_cast<int>(steps) + 1;

  strides_.assign(k_, 1);
  for (int d = k_ - 2; d >= 0; --d)
    strides_[d] = strides_[d + 1] * static_cast<std::size_t>(counts_[d + 1]);
  num_nodes_ = strides_[0] * static_cast<std::size_t>(counts_[0]);
}

SpaceTimeGrid SpaceTimeGrid::with_target_spacing(int k, int codim, std::vector<AxisRange> box,
                                                 double h_target, double t_start, double t_end,
                                                 double dt_target) {
  if (!(h_target > 0.0) || !(dt_target > 0.0))
    throw std::invalid_argument("grid spacings must be positive");
  if (box.empty()) throw std::invalid_argument("grid box is empty");
  // One h for all axes: snap on axis 0, then require the others commensurate.
  const double span0 = box[0].hi - box[0].lo;
  long long cells = std::max<long long>(4, std::llround(span0 / h_target));
  const double h = span0 / static_cast<double>(cells);
  const double tspan = t_end - t_start;
  long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(tspan / dt_target - 1e-12)));
  const double dt = (tspan > 0.0) ? tspan / static_cast<double>(steps) : dt_target;
  return SpaceTimeGrid(k, codim, std::move(box), h, t_start, t_end,
                       (tspan > 0.0) ? dt : dt_target);
}

std::vector<int> SpaceTimeGrid::node_multi(std::size_t idx) const {
  std::vector<int> mi(k_);
  for (int d = 0; d < k_; ++d) {
    mi[d] = static_cast<int>(idx / strides_[d]);
    idx %= strides_[d];
  }
  return mi;
}

std::size_t SpaceTimeGrid::node_index(const std::vector<int>& multi) const {
  std::size_t idx = 0;
  for (int d = 0; d < k_; ++d) idx += static_cast<std::size_t>(multi[d]) * strides_[d];
  return idx;
}

Eigen::VectorXd SpaceTimeGrid::node_point(std::size_t idx) const {
  Eigen::VectorXd x(k_);
  for (int d = 0; d < k_; ++d) {
    const int i = static_cast<int>(idx / strides_[d]);
    idx %= strides_[d];
    x(d) = coord(d, i);
  }
  return x;
}

bool SpaceTimeGrid::is_face_node(std::size_t idx) const {
  for (int d = 0; d < k_; ++d) {
    const int i = static_cast<int>(idx / strides_[d]);
    idx %= strides_[d];
    if (i == 0 || i == counts_[d] - 1) return true;
  }
  return false;
}

bool SpaceTimeGrid::is_interior(std::size_t idx) const { return !is_face_node(idx); }

double SpaceTimeGrid::quad_weight(std::size_t idx) const {
  double w = 1.0;
  for (int d = 0; d < k_; ++d) {
    const int i = static_cast<int>(idx / strides_[d]);
    idx %= strides_[d];
    w *= h_;
    if (i == 0 || i == counts_[d] - 1) w *= 0.5;
  }
  return w;
}

int SpaceTimeGrid::time_index(double t) const {
  const double pos = (t - t_start_) / dt_;
  const double r = std::round(pos);
  if (std::abs(pos - r) > 1e-9 * std::max(1.0, std::abs(pos)) || r < 0 || r >= num_times_)
    throw std::invalid_argument("t is not a stored grid time");
  return static_cast<int>(r);
}

GraphFlow::GraphFlow(SpaceTimeGrid grid, BoundaryPolicy policy)
    : grid_(std::move(grid)), policy_(policy),
      values_(static_cast<std::size_t>(grid_.num_times()) * grid_.num_nodes() * grid_.codim(),
              0.0) {}

FieldSample GraphFlow::slice_sample(int ti) const {
  FieldSample s(grid_.num_nodes(), grid_.codim());
  const double* src = slice(ti);
  std::copy(src, src + s.data.size(), s.data.begin());
  return s;
}

void GraphFlow::set_slice(int ti, const FieldSample& s) {
  if (s.num_nodes != grid_.num_nodes() || s.ncomp != grid_.codim())
    throw std::invalid_argument("slice shape mismatch");
  std::copy(s.data.begin(), s.data.end(), slice(ti));
}

void GraphFlow::check_finite() const {
  const std::size_t n = grid_.num_nodes();
  const int m = grid_.codim();
  for (int ti = 0; ti < grid_.num_times(); ++ti) {
    for (std::size_t node = 0; node < n; ++node) {
      for (int a = 0; a < m; ++a) {
        if (!is_finite(value(ti, node, a))) {
          std::ostringstream os;
          os << "non-finite flow value at node (";
          const Eigen::VectorXd x = grid_.node_point(node);
          for (int d = 0; d < grid_.dim(); ++d) os << (d ? "," : "") << x(d);
          os << "), t=" << grid_.time(ti) << ", component " << a;
          throw std::runtime_error(os.str());
        }
      }
    }
  }
}

RegionMask RegionMask::full() { return RegionMask{}; }

RegionMask RegionMask::ball(Eigen::VectorXd center, double radius) {
  RegionMask m;
  m.kind = Kind::kBall;
  m.center = std::move(center);
  m.radius = radius;
  return m;
}

RegionMask RegionMask::box(std::vector<AxisRange> bounds) {
  RegionMask m;
  m.kind = Kind::kBox;
  m.bounds = std::move(bounds);
  return m;
}

bool RegionMask::contains(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::kFull: return true;
    case Kind::kBall: return (x - center).norm() < radius;
    case Kind::kBox:
      for (std::size_t d = 0; d < bounds.size(); ++d)
        if (x(static_cast<int>(d)) < bounds[d].lo || x(static_cast<int>(d)) > bounds[d].hi)
          return false;
      return true;
  }
  return true;
}

bool RegionMask::clips(const SpaceTimeGrid& grid) const {
  if (kind == Kind::kFull) return false;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node)
    if (!contains(grid.node_point(node))) return true;
  return false;
}

}  // namespace graflow
