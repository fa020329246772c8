#pragma once

#include <limits>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "graflow/brakke.hpp"
#include "graflow/norms.hpp"
#include "graflow/solver.hpp"

namespace graflow {

struct CheckToggles {
  bool brakke = true;
  bool identity = true;
  bool motion_law = true;
  bool duality = true;
};

struct NormRequestConfig {
  double p = 2.0;
  double q = 2.0;
  double radius = 0.5;
  double alpha = -1.0;  // >= 0 selects the Hoelder estimate variant
};

struct Tolerances {
  double solution_error = -1.0;  // < 0: scenario default
  double brakke_c = 10.0;        // tol = c (h^2 + dt) scale
  double identity_c = 200.0;     // tol = c (h^2 + dt)
  double motion_law_c = 200.0;
  double duality_c = 10.0;       // tol = c h^{3/2}
};

struct ScenarioParams {
  double speed = 1.0;                      // forced-translation
  double amplitude = 0.5;                  // paraboloid-cap
  std::vector<double> offset;              // affine, size codim
  std::vector<std::vector<double>> slope;  // affine, k x codim
};

/// Parsed batch configuration. The schema is fixed: unknown keys are
/// rejected at parse time with a line/column diagnostic.
struct ScenarioConfig {
  std::string scenario;  // flat | affine | forced-translation | grim-reaper |
                         // paraboloid-cap | custom-expression
  int k = 1, n = 2;
  std::vector<AxisRange> box;
  double h = 0.1;
  double dt = -1.0;  // > 0: explicit dt (must divide the time span)
  double cfl_sigma = 0.9;
  double t0 = 0.0, t1 = 0.0;
  Scheme scheme = Scheme::kExplicit;
  std::optional<BoundaryPolicy> boundary;
  double gradient_guard = 10.0;
  std::vector<std::string> forcing_exprs;   // size n, or empty for scenario default
  std::optional<GriddedForcing> gridded_forcing;
  std::vector<std::string> initial_exprs;   // size codim (custom-expression)
  std::vector<std::string> boundary_exprs;  // size codim (custom-expression, optional)
  ScenarioParams params;
  CheckToggles checks;
  std::vector<NormRequestConfig> norms;
  bool fields_csv = false;
  int stride = 1;
  Tolerances tol;

  int codim() const { return n - k; }
};

ScenarioConfig parse_config(const std::string& json_text);

/// Canonical serialization of the resolved semantic fields (sorted keys,
/// exact float repr). Output options that do not affect results are
/// excluded, so the hash changes iff a semantically meaningful field does.
std::string canonical_config_json(const ScenarioConfig& cfg);
std::string config_hash_hex(const ScenarioConfig& cfg);

using ExactSolution = std::function<double(const Eigen::VectorXd& x, double t, int comp)>;

struct Scenario {
  ScenarioConfig cfg;
  SpaceTimeGrid grid;
  ForcingSpec forcing;
  ExactSolution exact;  // null when the scenario has no closed-form solution
  BoundaryValues boundary;
  BoundaryPolicy boundary_policy = BoundaryPolicy::kDirichletExact;
  FieldSample initial;
};

Scenario build_scenario(const ScenarioConfig& cfg);

struct CheckResult {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct SimulationOutput {
  ScenarioConfig cfg;
  FlowRunReport run_report;
  std::vector<CheckResult> checks;
  std::vector<BrakkeReport> brakke_reports;
  std::vector<EstimateReport> norm_reports;
  double solution_error = std::numeric_limits<double>::quiet_NaN();
  bool all_pass = true;
  std::shared_ptr<GraphFlow> flow;  // stored (possibly stride-thinned) flow
};

/// Runs the scenario and every enabled check. Throws SolverError when the
/// run aborts (CFL, guard, linear solver).
SimulationOutput simulate_scenario(const ScenarioConfig& cfg);

/// Same checks on an externally stored flow (no solving).
SimulationOutput verify_flow(const ScenarioConfig& cfg, GraphFlow flow);

nlohmann::json manifest_json(const SimulationOutput& out);
nlohmann::json brakke_reports_json(const std::vector<BrakkeReport>& reports);
nlohmann::json norm_reports_json(const std::vector<EstimateReport>& reports, int level);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0, dt = 0.0;
  double error = 0.0;
  double brakke = 0.0;
  double identity = 0.0;
  double motion_law = 0.0;
  double duality = 0.0;
  bool pass = true;
};

/// Runs the scenario at h, h/2, ... (dt scaled by 1/4 when given explicitly)
/// and collects the per-level measured residuals.
std::vector<ConvergenceRow> run_convergence(const ScenarioConfig& cfg, int levels,
                                            std::vector<SimulationOutput>* outputs = nullptr);

/// CSV table: level,h,dt,<measure>,<measure>_order,... with log2 ratio order
/// estimates; order cells show n/a at level 0 and for residuals at roundoff.
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

/// Deterministic verification families used by the manifest checks (exposed
/// for tests and the acceptance suite).
std::vector<TestFunction> standard_test_functions(const SpaceTimeGrid& grid,
                                                  const GraphFlow& flow, int count_min = 20);
std::vector<BrakkeWindow> standard_windows(const SpaceTimeGrid& grid, int count_min = 5);
std::vector<VectorTestField> standard_vector_fields(const SpaceTimeGrid& grid,
                                                    const GraphFlow& flow, int time_index,
                                                    int count = 10);

}  // namespace graflow
