#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "graflow/solver.hpp"
#include "graflow/stencils.hpp"

using namespace graflow;

namespace {

SpaceTimeGrid grim_grid(int cells, double sigma = 0.9) {
  const double h = 2.4 / cells;
  const double dt_target = sigma * h * h / 2.0;
  const double span = 0.25;
  const long long steps = static_cast<long long>(std::ceil(span / dt_target - 1e-12));
  return SpaceTimeGrid(1, 1, {{-1.2, 1.2}}, h, -0.25, 0.0, span / steps);
}

double grim(double x, double t) { return t - std::log(std::cos(x)); }

FieldSample exact_slice(const SpaceTimeGrid& g,
                        const std::function<double(const Eigen::VectorXd&, double, int)>& f,
                        double t) {
  FieldSample s(g.num_nodes(), g.codim());
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    for (int a = 0; a < g.codim(); ++a) s.at(node, a) = f(g.node_point(node), t, a);
  return s;
}

double max_error(const SpaceTimeGrid& g, const GraphFlow& flow,
                 const std::function<double(const Eigen::VectorXd&, double, int)>& f) {
  double err = 0.0;
  for (int ti = 0; ti < g.num_times(); ++ti)
    for (std::size_t node = 0; node < g.num_nodes(); ++node)
      for (int a = 0; a < g.codim(); ++a)
        err = std::max(err,
                       std::abs(flow.value(ti, node, a) - f(g.node_point(node), g.time(ti), a)));
  return err;
}

}  // namespace

TEST_CASE("forcing term: hand-evaluated example") {
  Matrix p(1, 1);
  p << 1.0;
  const GradientMatrix grad(p);
  const ProjectionPair planes = graph_tangent_plane(grad);
  Vector u(2);
  u << 1.0, 0.0;
  const Vector uf = forcing_term(grad, planes, u);
  REQUIRE(uf.size() == 1);
  CHECK(uf(0) == doctest::Approx(-1.0).epsilon(1e-14));

  // Flat graph: U = normal components of u.
  const GradientMatrix flat = GradientMatrix::zero(2, 2);
  Vector u4(4);
  u4 << 1.0, 2.0, 3.0, 4.0;
  const Vector uf4 = forcing_term(flat, graph_tangent_plane(flat), u4);
  CHECK(uf4(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(uf4(1) == doctest::Approx(4.0).epsilon(1e-14));

  // u = 0 gives U = 0.
  CHECK(forcing_term(grad, planes, Vector::Zero(2)).norm() == 0.0);
}

TEST_CASE("affine data is stationary") {
  SpaceTimeGrid g(2, 1, {{-1.0, 1.0}, {-1.0, 1.0}}, 0.125, 0.0, 0.03, 0.003);
  auto affine = [](const Eigen::VectorXd& x, double, int) { return 0.3 + 0.2 * x(0) - 0.1 * x(1); };
  SolverConfig cfg;
  cfg.boundary = BoundaryPolicy::kDirichletFrozen;
  const FlowRunResult r =
      run(g, exact_slice(g, affine, 0.0), cfg, ForcingSpec::zero(3), nullptr);
  REQUIRE(r.report.termination == FlowRunReport::Termination::kCompleted);
  // Stationary up to the rounding noise the stencils see on affine data.
  for (int ti = 1; ti < g.num_times(); ++ti)
    for (std::size_t node = 0; node < g.num_nodes(); ++node)
      CHECK(std::abs(r.flow.value(ti, node, 0) - r.flow.value(0, node, 0)) <= 1e-12);
}

TEST_CASE("forced translation is reproduced to machine precision") {
  SpaceTimeGrid g(1, 1, {{-1.0, 1.0}}, 0.05, 0.0, 0.1, 0.001);
  const double c = 0.75;
  auto exact = [c](const Eigen::VectorXd&, double t, int) { return c * t; };
  const ForcingSpec forcing =
      ForcingSpec::analytic({Expression::parse("0", 1, 1), Expression::parse("0.75", 1, 1)}, 2);
  SolverConfig cfg;
  cfg.boundary = BoundaryPolicy::kDirichletExact;
  const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };

  const FlowRunResult r = run(g, exact_slice(g, exact, 0.0), cfg, forcing, boundary);
  CHECK(max_error(g, r.flow, exact) <= 1e-12);

  // Semi-implicit: the explicit predictor is already the fixed point here.
  SolverConfig cfg2 = cfg;
  cfg2.scheme = Scheme::kSemiImplicit;
  const FlowRunResult r2 = run(g, exact_slice(g, exact, 0.0), cfg2, forcing, boundary);
  CHECK(max_error(g, r2.flow, exact) <= 1e-8);
}

TEST_CASE("grim reaper tracking and refinement") {
  auto exact = [](const Eigen::VectorXd& x, double t, int) { return grim(x(0), t); };
  double errs[2];
  for (int lvl = 0; lvl < 2; ++lvl) {
    const SpaceTimeGrid g = grim_grid(38 << lvl);
    SolverConfig cfg;
    cfg.boundary = BoundaryPolicy::kDirichletExact;
    const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };
    const FlowRunResult r = run(g, exact_slice(g, exact, -0.25), cfg, ForcingSpec::zero(2), boundary);
    REQUIRE(r.report.termination == FlowRunReport::Termination::kCompleted);
    errs[lvl] = max_error(g, r.flow, exact);
  }
  CHECK(errs[0] <= 1e-3);
  CHECK(errs[0] / errs[1] >= 3.0);
}

TEST_CASE("per-step consistency: order >= 1.9 in h on the grim reaper") {
  auto exact = [](const Eigen::VectorXd& x, double t, int) { return grim(x(0), t); };
  double res[2];
  for (int lvl = 0; lvl < 2; ++lvl) {
    const SpaceTimeGrid g = grim_grid(40 << lvl);
    SolverConfig cfg;
    cfg.boundary = BoundaryPolicy::kDirichletExact;
    const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };
    const double t = -0.2;
    const FieldSample next =
        step(g, exact_slice(g, exact, t), t, cfg, ForcingSpec::zero(2), boundary);
    // Sample the residual at nodes shared by every level: the truncation
    // constant grows like sec^4 x, so a max over level-dependent node sets
    // would contaminate the order estimate.
    double worst = 0.0;
    for (double xref : {-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9}) {
      const std::size_t node =
          static_cast<std::size_t>(std::llround((xref + 1.2) / g.spacing()));
      worst = std::max(worst,
                       std::abs(next.at(node, 0) - grim(g.node_point(node)(0), t + g.dt())));
    }
    res[lvl] = worst / g.dt();  // per-step PDE residual
  }
  CHECK(std::log2(res[0] / res[1]) >= 1.9);
}

TEST_CASE("per-step consistency: order ~1 in dt on an oscillating forced plane") {
  // u = (0, cos t), flat graph: f(t) = sin(t), no spatial error at all.
  const ForcingSpec forcing =
      ForcingSpec::analytic({Expression::parse("0", 1, 1), Expression::parse("cos(t)", 1, 1)}, 2);
  auto exact = [](const Eigen::VectorXd&, double t, int) { return std::sin(t); };
  double err[2];
  for (int lvl = 0; lvl < 2; ++lvl) {
    const double dt = 0.02 / (1 << lvl);
    SpaceTimeGrid g(1, 1, {{-1.0, 1.0}}, 0.25, 0.0, 0.4, dt);
    SolverConfig cfg;
    cfg.boundary = BoundaryPolicy::kDirichletExact;
    const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };
    const FlowRunResult r = run(g, exact_slice(g, exact, 0.0), cfg, forcing, boundary);
    err[lvl] = max_error(g, r.flow, exact);
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(order >= 0.9);
  CHECK(order <= 1.1);
}

TEST_CASE("maximum principle surrogate (codim 1, u = 0)") {
  SpaceTimeGrid g(1, 1, {{-1.2, 1.2}}, 0.05, 0.0, 0.05, 0.001);
  auto bumpy = [](const Eigen::VectorXd& x, double, int) {
    return 0.5 * std::sin(M_PI * x(0) / 1.2) + 0.2 * std::cos(2.0 * x(0));
  };
  const FieldSample init = exact_slice(g, bumpy, 0.0);
  double lo = 1e300, hi = -1e300;
  for (double v : init.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  SolverConfig cfg;
  cfg.boundary = BoundaryPolicy::kDirichletFrozen;
  const FlowRunResult r = run(g, init, cfg, ForcingSpec::zero(2), nullptr);
  for (double v : r.flow.values()) {
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("CFL violation aborts the explicit scheme") {
  const double h = 0.1;
  SpaceTimeGrid g(1, 1, {{-1.0, 1.0}}, h, 0.0, 0.02, h * h);  // dt = h^2 > 0.45 h^2
  SolverConfig cfg;
  cfg.boundary = BoundaryPolicy::kDirichletFrozen;
  GraphFlow flow(g, cfg.boundary);
  CHECK_THROWS_AS(run(g, flow.slice_sample(0), cfg, ForcingSpec::zero(2), nullptr), SolverError);
}

TEST_CASE("gradient guard trips on steep data") {
  const SpaceTimeGrid g = grim_grid(64);
  auto exact = [](const Eigen::VectorXd& x, double t, int) { return grim(x(0), t); };
  SolverConfig cfg;
  cfg.boundary = BoundaryPolicy::kDirichletExact;
  cfg.gradient_guard = 0.5;  // tan(1.2) = 2.57 exceeds this immediately
  const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };
  const FlowRunResult r = run(g, exact_slice(g, exact, -0.25), cfg, ForcingSpec::zero(2), boundary);
  CHECK(r.report.termination == FlowRunReport::Termination::kGradientGuard);
}

TEST_CASE("determinism: identical runs are bit identical") {
  const SpaceTimeGrid g = grim_grid(32);
  auto exact = [](const Eigen::VectorXd& x, double t, int) { return grim(x(0), t); };
  SolverConfig cfg;
  cfg.boundary = BoundaryPolicy::kDirichletExact;
  const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };
  const FlowRunResult a = run(g, exact_slice(g, exact, -0.25), cfg, ForcingSpec::zero(2), boundary);
  const FlowRunResult b = run(g, exact_slice(g, exact, -0.25), cfg, ForcingSpec::zero(2), boundary);
  CHECK(a.flow.values() == b.flow.values());
}

TEST_CASE("semi-implicit: stable past the explicit CFL limit") {
  auto exact = [](const Eigen::VectorXd& x, double t, int) { return grim(x(0), t); };
  const double h = 2.4 / 48;
  SpaceTimeGrid g(1, 1, {{-1.2, 1.2}}, h, -0.25, 0.0, 0.25 / 50);  // dt = 0.005 ~ 4 h^2
  REQUIRE(g.dt() > h * h / 2.0);
  SolverConfig cfg;
  cfg.scheme = Scheme::kSemiImplicit;
  cfg.boundary = BoundaryPolicy::kDirichletExact;
  const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };
  const FlowRunResult r = run(g, exact_slice(g, exact, -0.25), cfg, ForcingSpec::zero(2), boundary);
  REQUIRE(r.report.termination == FlowRunReport::Termination::kCompleted);
  CHECK(max_error(g, r.flow, exact) <= 5e-2);  // O(dt) accuracy, no blowup
}

TEST_CASE("semi-implicit matches explicit on a curved k=2 flow") {
  // Paraboloid-like initial data: nonzero g^{12} exercises the cross-term
  // assembly of the implicit matrix.
  SpaceTimeGrid g(2, 1, {{-1.0, 1.0}, {-1.0, 1.0}}, 0.1, 0.0, 0.008, 0.002);
  auto init = [](const Eigen::VectorXd& x, double, int) {
    return 0.4 * (x(0) * x(0) + x(1) * x(1)) + 0.3 * x(0) * x(1);
  };
  SolverConfig ex;
  ex.boundary = BoundaryPolicy::kDirichletFrozen;
  SolverConfig im = ex;
  im.scheme = Scheme::kSemiImplicit;
  const FieldSample start = exact_slice(g, init, 0.0);
  const FlowRunResult re = run(g, start, ex, ForcingSpec::zero(3), nullptr);
  const FlowRunResult ri = run(g, start, im, ForcingSpec::zero(3), nullptr);
  double diff = 0.0, moved = 0.0;
  const int last = g.num_times() - 1;
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    diff = std::max(diff, std::abs(re.flow.value(last, node, 0) - ri.flow.value(last, node, 0)));
    moved = std::max(moved, std::abs(re.flow.value(last, node, 0) - re.flow.value(0, node, 0)));
  }
  CHECK(moved > 1e-3);            // the cap actually flows
  CHECK(diff <= 20.0 * g.dt() * g.dt() / 0.002);  // O(dt) scheme difference
}

TEST_CASE("codimension-2 forced translation is exact") {
  SpaceTimeGrid g(1, 2, {{-1.0, 1.0}}, 0.1, 0.0, 0.1, 0.002);
  const double c = 0.4;
  auto exact = [c](const Eigen::VectorXd&, double t, int a) { return a == 1 ? c * t : 0.0; };
  const ForcingSpec forcing = ForcingSpec::analytic(
      {Expression::parse("0", 1, 2), Expression::parse("0", 1, 2),
       Expression::parse("0.4", 1, 2)},
      3);
  SolverConfig cfg;
  cfg.boundary = BoundaryPolicy::kDirichletExact;
  const auto boundary = [&](const Eigen::VectorXd& x, double t, int a) { return exact(x, t, a); };
  const FlowRunResult r = run(g, exact_slice(g, exact, 0.0), cfg, forcing, boundary);
  CHECK(max_error(g, r.flow, exact) <= 1e-12);
}

TEST_CASE("gridded forcing: evaluation and box rejection") {
  GriddedForcing gf;
  gf.ambient_dim = 2;
  gf.box = {{-1.0, 1.0}, {-1.0, 1.0}};
  gf.counts = {3, 3};
  gf.times = {0.0, 1.0};
  gf.values.assign(2 * 9 * 2, 0.0);
  // u = (0, x1) at t=0 and (0, 2 x1) at t=1 on the sample lattice.
  for (int ti = 0; ti < 2; ++ti)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double x = -1.0 + i;
        gf.values[((ti * 9) + i * 3 + j) * 2 + 1] = (ti + 1) * x;
      }
  const ForcingSpec f = ForcingSpec::gridded(gf);
  Eigen::VectorXd p(2);
  p << 0.5, 0.0;
  CHECK(f.evaluate(p, 1, 0.0)(1) == doctest::Approx(0.5));
  CHECK(f.evaluate(p, 1, 0.5)(1) == doctest::Approx(0.75));  // linear in t
  p << 1.5, 0.0;
  CHECK_THROWS_AS(f.evaluate(p, 1, 0.0), std::domain_error);
}
