#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "graflow/varifold.hpp"

using namespace graflow;

namespace {

SpaceTimeGrid static_grid(int k, double h, double lo, double hi) {
  std::vector<AxisRange> box(k, AxisRange{lo, hi});
  return SpaceTimeGrid(k, 1, box, h, 0.0, 4.0 * h * h, h * h);
}

FieldSample sample_of(const SpaceTimeGrid& g, const std::function<double(const Eigen::VectorXd&)>& f) {
  FieldSample s(g.num_nodes(), g.codim());
  for (std::size_t node = 0; node < g.num_nodes(); ++node) s.at(node, 0) = f(g.node_point(node));
  return s;
}

GraphFlow static_flow(const SpaceTimeGrid& g, const std::function<double(const Eigen::VectorXd&)>& f) {
  GraphFlow flow(g, BoundaryPolicy::kDirichletFrozen);
  const FieldSample s = sample_of(g, f);
  for (int ti = 0; ti < g.num_times(); ++ti) flow.set_slice(ti, s);
  return flow;
}

VectorTestField centered_field(int k, int n, double r_tan, double normal_center, int dir_axis) {
  Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
  for (int a = k; a < n; ++a) center(a) = normal_center;
  Eigen::VectorXd dir = Eigen::VectorXd::Unit(n, dir_axis);
  return VectorTestField(SpatialBump(center, r_tan, 3.0, k), dir);
}

}  // namespace

TEST_CASE("weight integral: arc length oracles") {
  // Flat slice over [-1,1]: integral of 1 is the box measure.
  {
    const SpaceTimeGrid g = static_grid(1, 0.01, -1.0, 1.0);
    const DiscreteVarifold v =
        build_varifold(g, sample_of(g, [](const Eigen::VectorXd&) { return 0.0; }), 0.0);
    CHECK(weight_integral(v, [](const Eigen::VectorXd&) { return 1.0; }) ==
          doctest::Approx(2.0).epsilon(1e-13));
    for (double w : v.area_weight) CHECK(w >= 0.01 - 1e-15);
  }
  // Slope-1 line over [0,1]: length sqrt(2).
  {
    const SpaceTimeGrid g = static_grid(1, 0.005, 0.0, 1.0);
    const DiscreteVarifold v =
        build_varifold(g, sample_of(g, [](const Eigen::VectorXd& x) { return x(0); }), 0.0);
    CHECK(weight_integral(v, [](const Eigen::VectorXd&) { return 1.0; }) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  // f = x^2/2 over [0,1]: (sqrt(2) + asinh(1)) / 2.
  {
    const SpaceTimeGrid g = static_grid(1, 1.0 / 128.0, 0.0, 1.0);
    const DiscreteVarifold v = build_varifold(
        g, sample_of(g, [](const Eigen::VectorXd& x) { return 0.5 * x(0) * x(0); }), 0.0);
    const double oracle = (std::sqrt(2.0) + std::asinh(1.0)) / 2.0;
    CHECK(weight_integral(v, [](const Eigen::VectorXd&) { return 1.0; }) ==
          doctest::Approx(oracle).epsilon(1e-5));
  }
}

TEST_CASE("weight consistency: same quadrature through two code paths") {
  const SpaceTimeGrid g = static_grid(2, 0.1, -1.0, 1.0);
  const FieldSample slice =
      sample_of(g, [](const Eigen::VectorXd& x) { return 0.3 * x(0) * x(0) - 0.2 * x(1); });
  const DiscreteVarifold v = build_varifold(g, slice, 0.0);
  const double via_varifold = weight_integral(v, [](const Eigen::VectorXd&) { return 1.0; });

  FieldSample sqrt_g(g.num_nodes(), 1);
  for (std::size_t node = 0; node < g.num_nodes(); ++node) sqrt_g.at(node, 0) = v.sqrt_g[node];
  const double via_quadrature = cell_quadrature(g, sqrt_g, {}, RegionMask::full()).value;
  CHECK(std::abs(via_varifold - via_quadrature) <= 1e-12 * std::max(1.0, via_quadrature));
}

TEST_CASE("first variation: flat slice, linearity, support check") {
  const SpaceTimeGrid g = static_grid(1, 1.0 / 64.0, -1.0, 1.0);
  const DiscreteVarifold v =
      build_varifold(g, sample_of(g, [](const Eigen::VectorXd&) { return 0.0; }), 0.0);

  const VectorTestField field = centered_field(1, 2, 0.5, 0.0, 0);
  const double dv = first_variation(v, field);
  // Divergence theorem on the plane: zero up to the trapezoid error of a C^2 bump.
  CHECK(std::abs(dv) <= 1.0 * g.spacing() * g.spacing());

  // Linearity: doubling the direction doubles the value exactly.
  VectorTestField twice(field.bump, 2.0 * field.direction);
  CHECK(first_variation(v, twice) == doctest::Approx(2.0 * dv).epsilon(1e-15).scale(1e-300));

  // Support touching the boundary ring is rejected.
  Eigen::VectorXd edge_center(2);
  edge_center << 0.7, 0.0;
  const VectorTestField bad(SpatialBump(edge_center, 0.31, 3.0, 1), Eigen::VectorXd::Unit(2, 1));
  CHECK_THROWS_AS(first_variation(v, bad), std::invalid_argument);
}

TEST_CASE("duality: paraboloid cap, order >= 1.5 under refinement") {
  double res[3];
  for (int lvl = 0; lvl < 3; ++lvl) {
    const double h = 0.125 / (1 << lvl);
    const SpaceTimeGrid g = static_grid(2, h, -1.0, 1.0);
    const FieldSample slice = sample_of(
        g, [](const Eigen::VectorXd& x) { return 0.5 * (x(0) * x(0) + x(1) * x(1)); });
    const DiscreteVarifold v = build_varifold(g, slice, 0.0);
    const FieldSample h_field = mean_curvature_field(g, slice);
    double worst = 0.0;
    for (int d = 0; d < 3; ++d) {
      const VectorTestField field = centered_field(2, 3, 0.45, 0.5, d);
      worst = std::max(worst, mean_curvature_duality_residual(v, field, h_field));
    }
    res[lvl] = worst;
  }
  CHECK(res[0] < 0.05);
  const double slope = std::log2(res[0] / res[2]) / 2.0;
  CHECK(slope >= 1.5);
}

TEST_CASE("duality: flat slice residual at roundoff") {
  const SpaceTimeGrid g = static_grid(1, 0.02, -1.0, 1.0);
  const FieldSample slice = sample_of(g, [](const Eigen::VectorXd&) { return 0.0; });
  const DiscreteVarifold v = build_varifold(g, slice, 0.0);
  const FieldSample h_field = mean_curvature_field(g, slice);
  const VectorTestField field = centered_field(1, 2, 0.4, 0.0, 1);
  // Normal-direction field on a flat slice: both sides vanish identically.
  CHECK(mean_curvature_duality_residual(v, field, h_field) <= 1e-10);
}

TEST_CASE("rotation covariance of the first variation") {
  const SpaceTimeGrid g = static_grid(1, 0.01, -1.0, 1.0);
  const FieldSample slice =
      sample_of(g, [](const Eigen::VectorXd& x) { return 0.4 * std::sin(x(0)); });
  const DiscreteVarifold v = build_varifold(g, slice, 0.0);
  const VectorTestField field = centered_field(1, 2, 0.5, 0.0, 1);
  const double dv = first_variation(v, field);

  const double theta = 0.7;
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);

  // Rotated varifold paired with the rotated field g'(y) = R g(R^T y),
  // evaluated by an independent node sum.
  double dv_rot = 0.0;
  for (std::size_t node = 0; node < v.num_nodes(); ++node) {
    const Eigen::VectorXd pos = rot * v.position(node);
    const Eigen::MatrixXd s = rot * v.tangent(node) * rot.transpose();
    const Eigen::MatrixXd jac = rot * field.jacobian(rot.transpose() * pos) * rot.transpose();
    dv_rot += (s.transpose() * jac).trace() * v.weight(node);
  }
  CHECK(dv_rot == doctest::Approx(dv).epsilon(1e-10));
}

TEST_CASE("h_l2_norm: flat zero, grim reaper stability, parabolic scaling") {
  // Flat static flow: zero.
  {
    const SpaceTimeGrid g = static_grid(1, 0.05, -1.0, 1.0);
    const GraphFlow flow = static_flow(g, [](const Eigen::VectorXd&) { return 0.0; });
    CHECK(h_l2_norm(SpaceTimeMeasure(flow), RegionMask::full(),
                    {g.t_start(), g.t_end()}) <= 1e-12);
  }

  // Exact grim reaper flows at two resolutions: value stable within 1%.
  auto grim_flow = [](int cells, double scale) {
    const double h = scale * 2.4 / cells;
    const double dt = scale * scale * 0.25 / 64.0;
    SpaceTimeGrid g(1, 1, {{-1.2 * scale, 1.2 * scale}}, h, -0.25 * scale * scale, 0.0, dt);
    GraphFlow flow(g, BoundaryPolicy::kDirichletExact);
    for (int ti = 0; ti < g.num_times(); ++ti)
      for (std::size_t node = 0; node < g.num_nodes(); ++node) {
        const double x = g.node_point(node)(0) / scale;
        const double t = g.time(ti) / (scale * scale);
        flow.value(ti, node, 0) = scale * (t - std::log(std::cos(x)));
      }
    return flow;
  };
  const GraphFlow f1 = grim_flow(64, 1.0);
  const GraphFlow f2 = grim_flow(128, 1.0);
  const double n1 = h_l2_norm(SpaceTimeMeasure(f1), RegionMask::full(), {-0.25, 0.0});
  const double n2 = h_l2_norm(SpaceTimeMeasure(f2), RegionMask::full(), {-0.25, 0.0});
  CHECK(n1 > 0.0);
  CHECK(std::abs(n1 - n2) <= 0.01 * n2);

  // Homothety x -> 2x, t -> 4t: the norm scales like lambda^{k/2} = sqrt(2).
  const GraphFlow f_scaled = grim_flow(64, 2.0);
  const double n_scaled =
      h_l2_norm(SpaceTimeMeasure(f_scaled), RegionMask::full(), {-1.0, 0.0});
  CHECK(n_scaled / n2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
}
