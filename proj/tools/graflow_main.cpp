#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "graflow/csv_io.hpp"
#include "graflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace graflow;

namespace {

// Exit codes: 0 all checks pass, 1 check failure, 2 config/input error,
// 3 solver abort.
constexpr int kExitCheckFail = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverAbort = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void print_checks(const SimulationOutput& out) {
  for (const CheckResult& c : out.checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": measured "
              << format_g17(c.measured);
    if (c.tolerance > 0.0) std::cout << " (tol " << format_g17(c.tolerance) << ")";
    if (!c.note.empty()) std::cout << " - " << c.note;
    std::cout << "\n";
  }
}

void write_outputs(const SimulationOutput& out, const fs::path& outdir,
                   const std::string& manifest_name = "manifest.json") {
  fs::create_directories(outdir);
  write_file(outdir / manifest_name, manifest_json(out).dump(2) + "\n");
  if (!out.brakke_reports.empty())
    write_file(outdir / "brakke_report.json", brakke_reports_json(out.brakke_reports).dump(2) + "\n");
  if (!out.norm_reports.empty())
    write_file(outdir / "norms.json", norm_reports_json(out.norm_reports, 0).dump(2) + "\n");
}

int cmd_simulate(const std::string& config_path, const std::string& outdir) {
  const ScenarioConfig cfg = parse_config(read_file(config_path));
  SimulationOutput out = simulate_scenario(cfg);
  write_outputs(out, outdir);
  if (cfg.fields_csv) dump_flow_csv(*out.flow, (fs::path(outdir) / "fields.csv").string());
  print_checks(out);
  return out.all_pass ? 0 : kExitCheckFail;
}

int cmd_converge(const std::string& config_path, int levels, const std::string& outdir) {
  const ScenarioConfig cfg = parse_config(read_file(config_path));
  std::vector<SimulationOutput> outputs;
  const std::vector<ConvergenceRow> rows = run_convergence(cfg, levels, &outputs);
  fs::create_directories(outdir);
  write_file(fs::path(outdir) / "convergence.csv", convergence_csv(rows));
  bool all = true;
  for (std::size_t lvl = 0; lvl < outputs.size(); ++lvl) {
    write_outputs(outputs[lvl], outdir, "manifest_L" + std::to_string(lvl) + ".json");
    all = all && outputs[lvl].all_pass;
    std::cout << "level " << lvl << " (h=" << format_g17(rows[lvl].h) << "): "
              << (outputs[lvl].all_pass ? "pass" : "FAIL") << "\n";
  }
  return all ? 0 : kExitCheckFail;
}

int cmd_verify(const std::string& config_path, const std::string& flow_path,
               const std::string& outdir) {
  const ScenarioConfig cfg = parse_config(read_file(config_path));
  const Scenario scn = build_scenario(cfg);
  SpaceTimeGrid grid = scn.grid;
  if (cfg.stride > 1) {
    if ((grid.num_times() - 1) % cfg.stride != 0)
      throw std::invalid_argument("'stride' must divide the number of time steps");
    std::vector<AxisRange> box;
    for (int d = 0; d < grid.dim(); ++d) box.push_back(grid.axis(d));
    grid = SpaceTimeGrid(grid.dim(), grid.codim(), box, grid.spacing(), grid.t_start(),
                         grid.t_end(), grid.dt() * cfg.stride);
  }
  GraphFlow flow = load_flow_csv(grid, scn.boundary_policy, flow_path);
  SimulationOutput out = verify_flow(cfg, std::move(flow));
  write_outputs(out, outdir);
  print_checks(out);
  return out.all_pass ? 0 : kExitCheckFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graflow: forced graphical mean curvature flow with weak-formulation checks"};
  app.require_subcommand(1);

  std::string config_path, outdir = "out", flow_path;
  int levels = 3;

  CLI::App* sim = app.add_subcommand("simulate", "run a scenario and its checks");
  sim->add_option("--config", config_path, "scenario config JSON")->required();
  sim->add_option("--out", outdir, "output directory");

  CLI::App* conv = app.add_subcommand("converge", "refinement study across h, h/2, ...");
  conv->add_option("--config", config_path, "scenario config JSON")->required();
  conv->add_option("--levels", levels, "number of refinement levels (>= 2)");
  conv->add_option("--out", outdir, "output directory");

  CLI::App* ver = app.add_subcommand("verify", "re-run checks on a stored flow dump");
  ver->add_option("--config", config_path, "scenario config JSON")->required();
  ver->add_option("--flow", flow_path, "fields.csv produced by simulate")->required();
  ver->add_option("--out", outdir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, outdir);
    if (conv->parsed()) return cmd_converge(config_path, levels, outdir);
    if (ver->parsed()) return cmd_verify(config_path, flow_path, outdir);
  } catch (const ParseError& e) {
    std::cerr << "config error";
    if (e.line > 0) std::cerr << " at line " << e.line << ", column " << e.column;
    std::cerr << ": " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SolverError& e) {
    std::cerr << "solver abort: " << e.what() << "\n";
    return kExitSolverAbort;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return 0;
}
