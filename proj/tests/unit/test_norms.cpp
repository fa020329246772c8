#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "graflow/norms.hpp"
#include "graflow/scenario.hpp"

using namespace graflow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GraphFlow fill(const SpaceTimeGrid& g, const std::function<double(double, double)>& f) {
  GraphFlow flow(g, BoundaryPolicy::kDirichletFrozen);
  for (int ti = 0; ti < g.num_times(); ++ti)
    for (std::size_t node = 0; node < g.num_nodes(); ++node)
      flow.value(ti, node, 0) = f(g.node_point(node)(0), g.time(ti));
  return flow;
}

NormRequest req_f(const SpaceTimeGrid& g, double p, double q) {
  NormRequest r;
  r.p = p;
  r.q = q;
  r.window = {g.t_start(), g.t_end()};
  return r;
}

}  // namespace

TEST_CASE("lpq norm: closed-form value on a constant field") {
  // field = 1 on [-1,1] x (-1,0), p=q=2: inner sqrt(2), outer sqrt(2).
  SpaceTimeGrid g(1, 1, {{-1.0, 1.0}}, 1.0 / 128.0, -1.0, 0.0, 1.0 / 128.0);
  const GraphFlow flow = fill(g, [](double, double) { return 1.0; });
  CHECK(lpq_norm(flow, nullptr, req_f(g, 2, 2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("lpq norm: p=q equals the plain space-time norm, homogeneity, max norms") {
  SpaceTimeGrid g(1, 1, {{-1.0, 1.0}}, 0.05, 0.0, 0.5, 0.05);
  const GraphFlow flow = fill(g, [](double x, double t) { return std::sin(3 * x) + 0.5 * t; });
  const double p = 3.0;
  const double lib = lpq_norm(flow, nullptr, req_f(g, p, p));
  // Independent route: one space-time trapezoid accumulation.
  double acc = 0.0;
  for (int ti = 0; ti < g.num_times(); ++ti) {
    const double wt = (ti == 0 || ti == g.num_times() - 1) ? 0.5 : 1.0;
    for (std::size_t node = 0; node < g.num_nodes(); ++node)
      acc += std::pow(std::abs(flow.value(ti, node, 0)), p) * g.quad_weight(node) * wt * g.dt();
  }
  CHECK(lib == doctest::Approx(std::pow(acc, 1.0 / p)).epsilon(1e-12));

  // Homogeneity: scaling the field scales the norm.
  const GraphFlow scaled = fill(g, [](double x, double t) { return 3.0 * (std::sin(3 * x) + 0.5 * t); });
  CHECK(lpq_norm(scaled, nullptr, req_f(g, p, p)) == doctest::Approx(3.0 * lib).epsilon(1e-13));

  // Infinity norms are plain maxima.
  const double linf = lpq_norm(flow, nullptr, req_f(g, kInf, kInf));
  double direct = 0.0;
  for (double v : flow.values()) direct = std::max(direct, std::abs(v));
  CHECK(linf == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("lpq norm: monotone in the mask, triangle inequality") {
  SpaceTimeGrid g(1, 1, {{-1.0, 1.0}}, 0.05, 0.0, 0.3, 0.05);
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  GraphFlow a(g, BoundaryPolicy::kDirichletFrozen), b(g, BoundaryPolicy::kDirichletFrozen),
      sum(g, BoundaryPolicy::kDirichletFrozen);
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    a.values()[i] = unit(rng);
    b.values()[i] = unit(rng);
    sum.values()[i] = a.values()[i] + b.values()[i];
  }
  NormRequest small = req_f(g, 2, 2);
  small.mask = RegionMask::ball(Eigen::VectorXd::Zero(1), 0.5);
  NormRequest big = req_f(g, 2, 2);
  CHECK(lpq_norm(a, nullptr, small) <= lpq_norm(a, nullptr, big) * (1 + 1e-12));
  const double na = lpq_norm(a, nullptr, big), nb = lpq_norm(b, nullptr, big);
  CHECK(lpq_norm(sum, nullptr, big) <= (na + nb) * (1 + 1e-12));
}

TEST_CASE("parabolic holder: closed-form examples") {
  // Constant field: zero for any alpha.
  {
    SpaceTimeGrid g(1, 1, {{0.0, 1.0}}, 1.0 / 16.0, 0.0, 1.0, 0.25);
    const GraphFlow flow = fill(g, [](double, double) { return 4.2; });
    CHECK(parabolic_holder(flow, 0.5, 0, RegionMask::full(), {0.0, 1.0}) == 0.0);
  }
  // f = x on [0,1], alpha = 1/2, order 0: sup |x-y|^{1/2} = 1.
  {
    SpaceTimeGrid g(1, 1, {{0.0, 1.0}}, 1.0 / 128.0, 0.0, 0.02, 0.01);
    const GraphFlow flow = fill(g, [](double x, double) { return x; });
    CHECK(parabolic_holder(flow, 0.5, 0, RegionMask::full(), {0.0, 0.0}) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  // f = t on a window of length 1: sup |t-s|^{1 - alpha/2} = 1.
  {
    SpaceTimeGrid g(1, 1, {{0.0, 1.0}}, 0.25, 0.0, 1.0, 1.0 / 64.0);
    const GraphFlow flow = fill(g, [](double, double t) { return t; });
    const RegionMask point = RegionMask::ball(Eigen::VectorXd::Constant(1, 0.5), 0.01);
    CHECK(parabolic_holder(flow, 0.6, 0, point, {0.0, 1.0}) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  // Order 1 on f = x: [grad f]_alpha = 0 and the time term vanishes.
  {
    SpaceTimeGrid g(1, 1, {{0.0, 1.0}}, 1.0 / 32.0, 0.0, 0.5, 0.125);
    const GraphFlow flow = fill(g, [](double x, double) { return x; });
    CHECK(parabolic_holder(flow, 0.5, 1, RegionMask::full(), {0.0, 0.5}) <= 1e-11);
  }
}

TEST_CASE("parabolic holder: Lipschitz bound and deterministic subsampling") {
  SpaceTimeGrid g(1, 1, {{0.0, 1.0}}, 1.0 / 64.0, 0.0, 1.0, 1.0 / 64.0);
  const double lam = 0.5;
  const GraphFlow flow = fill(g, [lam](double x, double) { return lam * x; });
  // 65 nodes x 65 slices = 4225 samples: the subsampled path.
  const double alpha = 0.5;
  const double sub1 = parabolic_holder(flow, alpha, 0, RegionMask::full(), {0.0, 1.0}, 5000);
  const double sub2 = parabolic_holder(flow, alpha, 0, RegionMask::full(), {0.0, 1.0}, 5000);
  CHECK(sub1 == sub2);  // deterministic
  // lambda-Lipschitz field: seminorm bounded by lam * diam^{1-alpha} on pairs.
  CHECK(sub1 <= lam * std::pow(std::sqrt(2.0), 1.0 - alpha) + 1e-12);
  // Subsampled sup is a lower bound for the full scan on a coarser grid.
  SpaceTimeGrid g2(1, 1, {{0.0, 1.0}}, 1.0 / 16.0, 0.0, 1.0, 0.05);
  const GraphFlow flow2 = fill(g2, [lam](double x, double) { return lam * x; });
  const double full = parabolic_holder(flow2, alpha, 0, RegionMask::full(), {0.0, 1.0});
  const double sub = parabolic_holder(flow2, alpha, 0, RegionMask::full(), {0.0, 1.0}, 50);
  CHECK(sub <= full + 1e-15);
}

TEST_CASE("estimate report: degenerate flat case, scaling invariance, stability") {
  // Flat static scenario: zero right side is tagged degenerate.
  {
    ScenarioConfig cfg;
    cfg.scenario = "flat";
    cfg.k = 1;
    cfg.n = 2;
    cfg.box = {{-1.0, 1.0}};
    cfg.h = 1.0 / 16.0;
    cfg.t0 = -0.3;
    cfg.t1 = 0.0;
    const Scenario scn = build_scenario(cfg);
    const FlowRunResult r = [&] {
      SolverConfig sc;
      sc.boundary = scn.boundary_policy;
      return run(scn.grid, scn.initial, sc, scn.forcing, scn.boundary);
    }();
    const EstimateReport rep =
        estimate_report(r.flow, scn.forcing, 2, 2, 0.5, Eigen::VectorXd::Zero(1));
    CHECK(rep.degenerate);
  }

  // Forced translation: the ratio is invariant under u -> lambda u (both
  // sides of the estimate are 1-homogeneous in (f, u)).
  auto translation_ratio = [](double speed, double h) {
    ScenarioConfig cfg;
    cfg.scenario = "forced-translation";
    cfg.k = 1;
    cfg.n = 2;
    cfg.box = {{-1.0, 1.0}};
    cfg.h = h;
    cfg.t0 = -0.3;
    cfg.t1 = 0.0;
    cfg.params.speed = speed;
    cfg.checks = {false, false, false, false};
    const SimulationOutput out = simulate_scenario(cfg);
    return estimate_report(*out.flow, build_scenario(cfg).forcing, 2, 2, 0.5,
                           Eigen::VectorXd::Zero(1));
  };
  const EstimateReport r1 = translation_ratio(1.0, 1.0 / 16.0);
  const EstimateReport r2 = translation_ratio(2.0, 1.0 / 16.0);
  CHECK(r1.ratio == doctest::Approx(r2.ratio).epsilon(1e-12));
  // Stable under refinement (10% band).
  const EstimateReport r3 = translation_ratio(1.0, 1.0 / 32.0);
  CHECK(std::abs(r3.ratio - r1.ratio) <= 0.1 * std::abs(r1.ratio));

  // Region coverage precondition: an outer ball past the box is rejected.
  {
    ScenarioConfig cfg;
    cfg.scenario = "flat";
    cfg.k = 1;
    cfg.n = 2;
    cfg.box = {{-1.0, 1.0}};
    cfg.h = 1.0 / 16.0;
    cfg.t0 = -0.3;
    cfg.t1 = 0.0;
    cfg.checks = {false, false, false, false};
    const SimulationOutput out = simulate_scenario(cfg);
    CHECK_THROWS_AS(estimate_report(*out.flow, ForcingSpec::zero(2), 2, 2, 2.0,
                                    Eigen::VectorXd::Zero(1)),
                    std::invalid_argument);
  }
}

TEST_CASE("holder estimate report: finite on a forced flow, seminorm path exercised") {
  const ScenarioConfig cfg = parse_config(R"json({
    "scenario": "custom-expression",
    "k": 1, "n": 2,
    "box": [[-1.0, 1.0]],
    "h": 0.0625,
    "t_range": [-0.3, 0.0],
    "initial": ["0"],
    "forcing": ["0", "cos(3*t) + 0.2*x1"],
    "checks": {"brakke": false, "identity": false, "motion_law": false, "duality": false},
    "norms": [{"R": 0.5, "alpha": 0.5}]
  })json");
  const SimulationOutput out = simulate_scenario(cfg);
  REQUIRE(out.norm_reports.size() == 1);
  const EstimateReport& rep = out.norm_reports[0];
  CHECK(rep.alpha == doctest::Approx(0.5));
  CHECK_FALSE(rep.degenerate);
  CHECK(std::isfinite(rep.ratio));
  CHECK(rep.ratio > 0.0);
  CHECK(rep.rhs_u > 0.0);  // both the sup and the seminorm of u contribute
  // A time-varying forcing has a positive Hoelder seminorm along the graph.
  const EstimateReport plain = estimate_report(*out.flow, build_scenario(cfg).forcing, 2, 2,
                                               0.5, Eigen::VectorXd::Zero(1));
  CHECK(std::isfinite(plain.ratio));
}
