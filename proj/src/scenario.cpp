#include "graflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "graflow/csv_io.hpp"

namespace graflow {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw ParseError(msg, 0, 0); }

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      config_error("unknown key '" + item.key() + "' in " + where);
  }
}

double get_num(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) config_error("'" + key + "' must be a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) config_error("'" + key + "' must be an integer");
  return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) config_error("'" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) config_error("'" + key + "' must be a string");
  return obj[key].get<std::string>();
}

std::vector<std::string> get_str_array(const json& v, const std::string& where) {
  if (!v.is_array()) config_error(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) config_error(where + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

GriddedForcing parse_gridded(const json& g) {
  require_keys(g, "forcing.gridded", {"box", "counts", "times", "values"});
  GriddedForcing gf;
  if (!g.contains("box") || !g["box"].is_array()) config_error("gridded forcing needs 'box'");
  for (const auto& ax : g["box"]) {
    if (!ax.is_array() || ax.size() != 2) config_error("gridded box axis must be [lo, hi]");
    gf.box.push_back({ax[0].get<double>(), ax[1].get<double>()});
  }
  gf.ambient_dim = static_cast<int>(gf.box.size());
  if (!g.contains("counts")) config_error("gridded forcing needs 'counts'");
  for (const auto& c : g["counts"]) gf.counts.push_back(c.get<int>());
  if (!g.contains("times")) config_error("gridded forcing needs 'times'");
  for (const auto& t : g["times"]) gf.times.push_back(t.get<double>());
  if (!g.contains("values")) config_error("gridded forcing needs 'values'");
  for (const auto& v : g["values"]) gf.values.push_back(v.get<double>());
  return gf;
}

double default_solution_tol(const std::string& scenario) {
  if (scenario == "grim-reaper") return 5e-3;
  return 1e-12;  // schemes are exact on the other closed-form scenarios
}

std::vector<int> sampled_interior_times(int num_times) {
  std::vector<int> out;
  if (num_times < 3) return out;
  const int last = num_times - 2;
  for (int frac : {0, 1, 2, 3, 4}) {
    int ti = 1 + static_cast<int>(std::llround(frac * 0.25 * (last - 1)));
    ti = std::clamp(ti, 1, last);
    if (out.empty() || out.back() != ti) out.push_back(ti);
  }
  return out;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(std::string("config JSON: ") + e.what(), line, col);
  }
  if (!root.is_object()) config_error("config root must be a JSON object");
  require_keys(root, "config root",
               {"scenario", "k", "n", "box", "h", "dt", "cfl_sigma", "t_range", "scheme",
                "boundary", "gradient_guard", "forcing", "initial", "boundary_values",
                "scenario_params", "checks", "norms", "output", "tolerances"});

  ScenarioConfig cfg;
  cfg.scenario = get_str(root, "scenario", "");
  static const std::set<std::string> kScenarios = {
      "flat", "affine", "forced-translation", "grim-reaper", "paraboloid-cap",
      "custom-expression"};
  if (!kScenarios.count(cfg.scenario))
    config_error("'scenario' must be one of flat, affine, forced-translation, grim-reaper, "
                 "paraboloid-cap, custom-expression");

  cfg.k = get_int(root, "k", 1);
  cfg.n = get_int(root, "n", cfg.k + 1);
  if (cfg.k < 1 || cfg.n <= cfg.k) config_error("need 1 <= k < n");

  if (!root.contains("box") || !root["box"].is_array() ||
      root["box"].size() != static_cast<std::size_t>(cfg.k))
    config_error("'box' must be an array of k [lo, hi] ranges");
  for (const auto& ax : root["box"]) {
    if (!ax.is_array() || ax.size() != 2) config_error("each box axis must be [lo, hi]");
    cfg.box.push_back({ax[0].get<double>(), ax[1].get<double>()});
    if (!(cfg.box.back().hi > cfg.box.back().lo)) config_error("box axis has empty span");
  }

  cfg.h = get_num(root, "h", -1.0);
  if (!(cfg.h > 0.0)) config_error("'h' must be a positive number");
  cfg.dt = get_num(root, "dt", -1.0);
  cfg.cfl_sigma = get_num(root, "cfl_sigma", 0.9);
  if (root.contains("dt") && root.contains("cfl_sigma"))
    config_error("give either 'dt' or 'cfl_sigma', not both");
  if (!(cfg.cfl_sigma > 0.0) || cfg.cfl_sigma > 1.0)
    config_error("'cfl_sigma' must lie in (0, 1]");

  if (!root.contains("t_range") || !root["t_range"].is_array() || root["t_range"].size() != 2)
    config_error("'t_range' must be [t_start, t_end]");
  cfg.t0 = root["t_range"][0].get<double>();
  cfg.t1 = root["t_range"][1].get<double>();
  if (!(cfg.t1 > cfg.t0)) config_error("t_range must have t_end > t_start");

  const std::string scheme = get_str(root, "scheme", "explicit");
  if (scheme == "explicit") cfg.scheme = Scheme::kExplicit;
  else if (scheme == "semi-implicit") cfg.scheme = Scheme::kSemiImplicit;
  else config_error("'scheme' must be explicit or semi-implicit");

  if (root.contains("boundary")) {
    const std::string b = get_str(root, "boundary", "");
    if (b == "dirichlet-exact") cfg.boundary = BoundaryPolicy::kDirichletExact;
    else if (b == "dirichlet-frozen") cfg.boundary = BoundaryPolicy::kDirichletFrozen;
    else config_error("'boundary' must be dirichlet-exact or dirichlet-frozen");
  }

  cfg.gradient_guard = get_num(root, "gradient_guard", 10.0);
  if (!(cfg.gradient_guard > 0.0)) config_error("'gradient_guard' must be positive");

  if (root.contains("forcing") && !root["forcing"].is_null()) {
    const json& f = root["forcing"];
    if (f.is_object()) {
      require_keys(f, "forcing", {"gridded"});
      if (!f.contains("gridded")) config_error("forcing object must hold 'gridded'");
      cfg.gridded_forcing = parse_gridded(f["gridded"]);
    } else {
      cfg.forcing_exprs = get_str_array(f, "'forcing'");
      if (static_cast<int>(cfg.forcing_exprs.size()) != cfg.n)
        config_error("'forcing' needs one expression per ambient component (n)");
    }
  }
  if (root.contains("initial") && !root["initial"].is_null()) {
    cfg.initial_exprs = get_str_array(root["initial"], "'initial'");
    if (static_cast<int>(cfg.initial_exprs.size()) != cfg.codim())
      config_error("'initial' needs one expression per graph component (n - k)");
  }
  if (root.contains("boundary_values") && !root["boundary_values"].is_null()) {
    cfg.boundary_exprs = get_str_array(root["boundary_values"], "'boundary_values'");
    if (static_cast<int>(cfg.boundary_exprs.size()) != cfg.codim())
      config_error("'boundary_values' needs one expression per graph component (n - k)");
  }

  if (root.contains("scenario_params")) {
    const json& sp = root["scenario_params"];
    if (cfg.scenario == "forced-translation") {
      require_keys(sp, "scenario_params", {"speed"});
      cfg.params.speed = get_num(sp, "speed", 1.0);
    } else if (cfg.scenario == "paraboloid-cap") {
      require_keys(sp, "scenario_params", {"amplitude"});
      cfg.params.amplitude = get_num(sp, "amplitude", 0.5);
    } else if (cfg.scenario == "affine") {
      require_keys(sp, "scenario_params", {"offset", "slope"});
      if (sp.contains("offset"))
        for (const auto& v : sp["offset"]) cfg.params.offset.push_back(v.get<double>());
      if (sp.contains("slope")) {
        for (const auto& row : sp["slope"]) {
          cfg.params.slope.emplace_back();
          for (const auto& v : row) cfg.params.slope.back().push_back(v.get<double>());
        }
      }
    } else {
      require_keys(sp, "scenario_params", {});
    }
  }

  if (root.contains("checks")) {
    const json& c = root["checks"];
    require_keys(c, "checks", {"brakke", "identity", "motion_law", "duality"});
    cfg.checks.brakke = get_bool(c, "brakke", true);
    cfg.checks.identity = get_bool(c, "identity", true);
    cfg.checks.motion_law = get_bool(c, "motion_law", true);
    cfg.checks.duality = get_bool(c, "duality", true);
  }

  if (root.contains("norms")) {
    if (!root["norms"].is_array()) config_error("'norms' must be an array");
    for (const auto& r : root["norms"]) {
      require_keys(r, "norms[]", {"p", "q", "R", "alpha"});
      NormRequestConfig nr;
      nr.p = get_num(r, "p", 2.0);
      nr.q = get_num(r, "q", 2.0);
      nr.radius = get_num(r, "R", 0.5);
      nr.alpha = get_num(r, "alpha", -1.0);
      if (nr.p < 1.0 || nr.q < 1.0 || !(nr.radius > 0.0))
        config_error("norm request needs p, q >= 1 and R > 0");
      if (r.contains("alpha") && (!(nr.alpha > 0.0) || nr.alpha >= 1.0))
        config_error("norm request 'alpha' must lie in (0, 1)");
      cfg.norms.push_back(nr);
    }
  }

  if (root.contains("output")) {
    const json& o = root["output"];
    require_keys(o, "output", {"fields_csv", "stride"});
    cfg.fields_csv = get_bool(o, "fields_csv", false);
    cfg.stride = get_int(o, "stride", 1);
    if (cfg.stride < 1) config_error("'stride' must be >= 1");
  }

  if (root.contains("tolerances")) {
    const json& t = root["tolerances"];
    require_keys(t, "tolerances",
                 {"solution_error", "brakke_c", "identity_c", "motion_law_c", "duality_c"});
    cfg.tol.solution_error = get_num(t, "solution_error", -1.0);
    cfg.tol.brakke_c = get_num(t, "brakke_c", 10.0);
    cfg.tol.identity_c = get_num(t, "identity_c", 200.0);
    cfg.tol.motion_law_c = get_num(t, "motion_law_c", 200.0);
    cfg.tol.duality_c = get_num(t, "duality_c", 10.0);
  }

  if (cfg.scenario == "grim-reaper" && (cfg.k != 1 || cfg.n != 2))
    config_error("grim-reaper needs k=1, n=2");
  if (cfg.scenario == "paraboloid-cap" && (cfg.k != 2 || cfg.n != 3))
    config_error("paraboloid-cap needs k=2, n=3");
  if (cfg.scenario == "custom-expression" && cfg.initial_exprs.empty())
    config_error("custom-expression needs 'initial' expressions");
  return cfg;
}

std::string canonical_config_json(const ScenarioConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  j["k"] = cfg.k;
  j["n"] = cfg.n;
  json box = json::array();
  for (const auto& ax : cfg.box) box.push_back({ax.lo, ax.hi});
  j["box"] = box;
  j["h"] = cfg.h;
  j["dt"] = cfg.dt;
  j["cfl_sigma"] = cfg.cfl_sigma;
  j["t_range"] = {cfg.t0, cfg.t1};
  j["scheme"] = to_string(cfg.scheme);
  j["boundary"] = cfg.boundary ? to_string(*cfg.boundary) : "auto";
  j["gradient_guard"] = cfg.gradient_guard;
  j["forcing"] = cfg.forcing_exprs;
  if (cfg.gridded_forcing) {
    json g;
    json gbox = json::array();
    for (const auto& ax : cfg.gridded_forcing->box) gbox.push_back({ax.lo, ax.hi});
    g["box"] = gbox;
    g["counts"] = cfg.gridded_forcing->counts;
    g["times"] = cfg.gridded_forcing->times;
    g["values"] = cfg.gridded_forcing->values;
    j["gridded_forcing"] = g;
  }
  j["initial"] = cfg.initial_exprs;
  j["boundary_values"] = cfg.boundary_exprs;
  j["params"] = {{"speed", cfg.params.speed},
                 {"amplitude", cfg.params.amplitude},
                 {"offset", cfg.params.offset},
                 {"slope", cfg.params.slope}};
  j["checks"] = {{"brakke", cfg.checks.brakke},
                 {"identity", cfg.checks.identity},
                 {"motion_law", cfg.checks.motion_law},
                 {"duality", cfg.checks.duality}};
  json norms = json::array();
  for (const auto& nr : cfg.norms)
    norms.push_back({{"p", nr.p}, {"q", nr.q}, {"R", nr.radius}, {"alpha", nr.alpha}});
  j["norms"] = norms;
  j["stride"] = cfg.stride;
  j["tolerances"] = {{"solution_error", cfg.tol.solution_error},
                     {"brakke_c", cfg.tol.brakke_c},
                     {"identity_c", cfg.tol.identity_c},
                     {"motion_law_c", cfg.tol.motion_law_c},
                     {"duality_c", cfg.tol.duality_c}};
  return j.dump();
}

std::string config_hash_hex(const ScenarioConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config_json(cfg))));
  return buf;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  const int k = cfg.k, m = cfg.codim(), n = cfg.n;

  if (cfg.scenario == "grim-reaper") {
    for (const auto& ax : cfg.box)
      if (std::abs(ax.lo) > 1.45 || std::abs(ax.hi) > 1.45)
        throw std::invalid_argument("grim-reaper box must stay within (-1.45, 1.45)");
  }

  // Snap the spacing on axis 0, then the time step (never above the target,
  // so an explicit CFL target stays valid).
  const double span0 = cfg.box[0].span();
  const long long cells = std::max<long long>(4, std::llround(span0 / cfg.h));
  const double h = span0 / static_cast<double>(cells);
  const double tspan = cfg.t1 - cfg.t0;
  double dt;
  if (cfg.dt > 0.0) {
    const double steps_real = tspan / cfg.dt;
    if (std::abs(steps_real - std::round(steps_real)) > 1e-9 * std::max(1.0, steps_real))
      throw std::invalid_argument("'dt' must divide the t_range span");
    dt = cfg.dt;
  } else {
    const double dt_target = cfg.cfl_sigma * h * h / (2.0 * k);
    const long long steps =
        std::max<long long>(1, static_cast<long long>(std::ceil(tspan / dt_target - 1e-12)));
    dt = tspan / static_cast<double>(steps);
  }
  SpaceTimeGrid grid(k, m, cfg.box, h, cfg.t0, cfg.t1, dt);

  Scenario scn{cfg, grid, ForcingSpec::zero(n), nullptr, nullptr,
               BoundaryPolicy::kDirichletExact, FieldSample(grid.num_nodes(), m)};

  // Forcing.
  if (!cfg.forcing_exprs.empty()) {
    std::vector<Expression> comps;
    for (const auto& text : cfg.forcing_exprs) comps.push_back(Expression::parse(text, k, m));
    scn.forcing = ForcingSpec::analytic(std::move(comps), n);
  } else if (cfg.gridded_forcing) {
    scn.forcing = ForcingSpec::gridded(*cfg.gridded_forcing);
  } else if (cfg.scenario == "forced-translation") {
    std::vector<Expression> comps;
    for (int c = 0; c < n; ++c)
      comps.push_back(Expression::parse(c == n - 1 ? format_g17(cfg.params.speed) : "0", k, m));
    scn.forcing = ForcingSpec::analytic(std::move(comps), n);
  }

  // Exact solution and initial data.
  if (cfg.scenario == "flat") {
    scn.exact = [](const Eigen::VectorXd&, double, int) { return 0.0; };
  } else if (cfg.scenario == "affine") {
    std::vector<double> offset = cfg.params.offset;
    std::vector<std::vector<double>> slope = cfg.params.slope;
    if (offset.empty()) offset.assign(m, 0.1);
    if (static_cast<int>(offset.size()) != m)
      throw std::invalid_argument("affine offset needs n - k entries");
    if (slope.empty()) {
      slope.assign(k, std::vector<double>(m));
      for (int i = 0; i < k; ++i)
        for (int a = 0; a < m; ++a) slope[i][a] = 0.25 + 0.1 * i - 0.05 * a;
    }
    if (static_cast<int>(slope.size()) != k || static_cast<int>(slope[0].size()) != m)
      throw std::invalid_argument("affine slope needs k x (n - k) entries");
    scn.exact = [offset, slope, k](const Eigen::VectorXd& x, double, int a) {
      double v = offset[a];
      for (int i = 0; i < k; ++i) v += slope[i][a] * x(i);
      return v;
    };
  } else if (cfg.scenario == "forced-translation") {
    const double c = cfg.params.speed;
    const double t0 = cfg.t0;
    scn.exact = [c, t0, m](const Eigen::VectorXd&, double t, int a) {
      return a == m - 1 ? c * (t - t0) : 0.0;
    };
  } else if (cfg.scenario == "grim-reaper") {
    scn.exact = [](const Eigen::VectorXd& x, double t, int) {
      return t - std::log(std::cos(x(0)));
    };
  } else if (cfg.scenario == "paraboloid-cap") {
    const double amp = cfg.params.amplitude;
    // Static initial cap; the flow evolves it, no closed-form solution kept.
    for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
      const Eigen::VectorXd x = grid.node_point(node);
      scn.initial.at(node, 0) = amp * (x(0) * x(0) + x(1) * x(1));
    }
  } else if (cfg.scenario == "custom-expression") {
    std::vector<Expression> init;
    for (const auto& text : cfg.initial_exprs) init.push_back(Expression::parse(text, k, m));
    std::vector<double> zeros(m, 0.0);
    for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
      const Eigen::VectorXd x = grid.node_point(node);
      for (int a = 0; a < m; ++a)
        scn.initial.at(node, a) = init[a].evaluate(x.data(), zeros.data(), cfg.t0);
    }
  }

  if (scn.exact) {
    for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
      const Eigen::VectorXd x = grid.node_point(node);
      for (int a = 0; a < m; ++a) scn.initial.at(node, a) = scn.exact(x, cfg.t0, a);
    }
  }

  // Boundary data.
  if (!cfg.boundary_exprs.empty()) {
    std::vector<Expression> be;
    for (const auto& text : cfg.boundary_exprs) be.push_back(Expression::parse(text, k, m));
    const int mm = m;
    auto exprs = std::make_shared<std::vector<Expression>>(std::move(be));
    scn.boundary = [exprs, mm](const Eigen::VectorXd& x, double t, int a) {
      std::vector<double> zeros(static_cast<std::size_t>(mm), 0.0);
      return (*exprs)[a].evaluate(x.data(), zeros.data(), t);
    };
  } else if (scn.exact) {
    const ExactSolution ex = scn.exact;
    scn.boundary = [ex](const Eigen::VectorXd& x, double t, int a) { return ex(x, t, a); };
  }

  scn.boundary_policy = cfg.boundary.value_or(scn.boundary ? BoundaryPolicy::kDirichletExact
                                                           : BoundaryPolicy::kDirichletFrozen);
  if (scn.boundary_policy == BoundaryPolicy::kDirichletExact && !scn.boundary)
    throw std::invalid_argument(
        "dirichlet-exact boundary needs an exact solution or boundary_values expressions");
  return scn;
}

std::vector<TestFunction> standard_test_functions(const SpaceTimeGrid& grid,
                                                  const GraphFlow& flow, int count_min) {
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  if (count_min > 24) throw std::invalid_argument("standard family provides up to 24 functions");

  // Normal-block center/extent from the f range over the whole flow.
  Eigen::VectorXd fmin = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  Eigen::VectorXd fmax = -fmin;
  for (int ti = 0; ti < grid.num_times(); ++ti)
    for (std::size_t node = 0; node < grid.num_nodes(); ++node)
      for (int a = 0; a < m; ++a) {
        fmin(a) = std::min(fmin(a), flow.value(ti, node, a));
        fmax(a) = std::max(fmax(a), flow.value(ti, node, a));
      }
  double half_min = std::numeric_limits<double>::infinity();
  for (int d = 0; d < k; ++d) half_min = std::min(half_min, grid.axis(d).span() / 2.0);
  double r_norm_sq = 0.0;
  for (int a = 0; a < m; ++a) {
    const double half = (fmax(a) - fmin(a)) / 2.0 + 0.3 * half_min;
    r_norm_sq += half * half;
  }
  const double r_norm_base = 1.25 * std::sqrt(r_norm_sq);

  const double tspan = grid.t_end() - grid.t_start();
  const double center_fracs[6] = {-0.45, -0.27, -0.09, 0.09, 0.27, 0.45};
  const double rtan_fracs[2] = {0.35, 0.5};
  const double time_cfg[2][2] = {{0.45, 0.3}, {0.6, 0.38}};

  std::vector<TestFunction> phis;
  int idx = 0;
  for (int ci = 0; ci < 6 && static_cast<int>(phis.size()) < count_min; ++ci) {
    for (int ri = 0; ri < 2 && static_cast<int>(phis.size()) < count_min; ++ri) {
      for (int tc = 0; tc < 2 && static_cast<int>(phis.size()) < count_min; ++tc) {
        Eigen::VectorXd center(n);
        for (int d = 0; d < k; ++d) {
          const double mid = (grid.axis(d).lo + grid.axis(d).hi) / 2.0;
          const double sign = (d % 2 == 0) ? 1.0 : -1.0;
          center(d) = mid + sign * center_fracs[ci] * grid.axis(d).span() / 2.0;
        }
        for (int a = 0; a < m; ++a) center(k + a) = (fmin(a) + fmax(a)) / 2.0;
        const double r_tan = rtan_fracs[ri] * half_min;
        const double r_norm = (idx % 2 == 0 ? 1.0 : 0.7) * r_norm_base;
        const double t_center = grid.t_start() + time_cfg[tc][0] * tspan;
        const double tau = time_cfg[tc][1] * tspan;
        char id[16];
        std::snprintf(id, sizeof(id), "phi%02d", idx);
        phis.emplace_back(id, SpatialBump(center, r_tan, r_norm, k), t_center, tau, grid);
        ++idx;
      }
    }
  }
  return phis;
}

std::vector<BrakkeWindow> standard_windows(const SpaceTimeGrid& grid, int count_min) {
  const double fracs[6][2] = {{0.10, 0.90}, {0.20, 0.55}, {0.45, 0.85},
                              {0.30, 0.70}, {0.15, 0.40}, {0.60, 0.92}};
  std::vector<BrakkeWindow> windows;
  const int last = grid.num_times() - 1;
  for (const auto& f : fracs) {
    const int i1 = static_cast<int>(std::llround(f[0] * last));
    const int i2 = static_cast<int>(std::llround(f[1] * last));
    if (i1 >= i2) continue;
    windows.push_back({grid.time(i1), grid.time(i2)});
    if (static_cast<int>(windows.size()) >= std::max(count_min, 6)) break;
  }
  if (static_cast<int>(windows.size()) < count_min)
    throw std::invalid_argument("grid has too few time levels for the standard window family");
  return windows;
}

std::vector<VectorTestField> standard_vector_fields(const SpaceTimeGrid& grid,
                                                    const GraphFlow& flow, int time_index,
                                                    int count) {
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  Eigen::VectorXd fmin = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  Eigen::VectorXd fmax = -fmin;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node)
    for (int a = 0; a < m; ++a) {
      fmin(a) = std::min(fmin(a), flow.value(time_index, node, a));
      fmax(a) = std::max(fmax(a), flow.value(time_index, node, a));
    }
  double half_min = std::numeric_limits<double>::infinity();
  for (int d = 0; d < k; ++d) half_min = std::min(half_min, grid.axis(d).span() / 2.0);
  double r_norm_sq = 0.0;
  for (int a = 0; a < m; ++a) {
    const double half = (fmax(a) - fmin(a)) / 2.0 + 0.3 * half_min;
    r_norm_sq += half * half;
  }
  const double r_norm = 1.25 * std::sqrt(r_norm_sq);

  const double center_fracs[3] = {0.0, 0.1, -0.1};
  const double rtan_fracs[2] = {0.4, 0.55};

  // Directions along the normal coordinate axes: the duality pairing tests
  // h (a normal vector) directly, and on a flat slice both sides vanish
  // exactly instead of leaving the tangential-divergence quadrature error.
  std::vector<VectorTestField> fields;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd center(n);
    for (int d = 0; d < k; ++d) {
      const double mid = (grid.axis(d).lo + grid.axis(d).hi) / 2.0;
      const double sign = ((i + d) % 2 == 0) ? 1.0 : -1.0;
      center(d) = mid + sign * center_fracs[i % 3] * grid.axis(d).span() / 2.0;
    }
    for (int a = 0; a < m; ++a) center(k + a) = (fmin(a) + fmax(a)) / 2.0;
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    dir(k + (i % m)) = ((i / m) % 2 == 0) ? 1.0 : -1.0;
    fields.emplace_back(SpatialBump(center, rtan_fracs[i % 2] * half_min, r_norm, k), dir);
  }
  return fields;
}

namespace {

double max_exact_error(const Scenario& scn, const GraphFlow& flow) {
  const SpaceTimeGrid& grid = flow.grid();
  double err = 0.0;
  for (int ti = 0; ti < grid.num_times(); ++ti) {
    const double t = grid.time(ti);
    for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
      const Eigen::VectorXd x = grid.node_point(node);
      for (int a = 0; a < grid.codim(); ++a)
        err = std::max(err, std::abs(flow.value(ti, node, a) - scn.exact(x, t, a)));
    }
  }
  return err;
}

void run_all_checks(const Scenario& scn, const GraphFlow& flow, SimulationOutput* out) {
  const ScenarioConfig& cfg = scn.cfg;
  const SpaceTimeGrid& grid = flow.grid();
  const double disc = grid.spacing() * grid.spacing() + grid.dt();
  const bool has_exact = static_cast<bool>(scn.exact);

  if (has_exact) {
    out->solution_error = max_exact_error(scn, flow);
    CheckResult r;
    r.name = "solution-error";
    r.measured = out->solution_error;
    r.tolerance =
        cfg.tol.solution_error >= 0.0 ? cfg.tol.solution_error : default_solution_tol(cfg.scenario);
    r.pass = r.measured <= r.tolerance;
    out->checks.push_back(r);
  }

  if (cfg.checks.brakke && grid.num_times() < 8) {
    out->checks.push_back({"brakke", false, 0.0, 0.0,
                           "cannot run: the standard window family needs >= 8 stored time levels"});
  }
  if (cfg.checks.brakke && grid.num_times() >= 8) {
    const SpaceTimeMeasure M(flow);
    const std::vector<TestFunction> phis = standard_test_functions(grid, flow, 20);
    const std::vector<BrakkeWindow> windows = standard_windows(grid, 5);
    const VelocityField v = graph_motion_velocity(flow);
    out->brakke_reports = brakke_residual_batch(M, v, phis, windows, cfg.tol.brakke_c);
    CheckResult r;
    r.name = "brakke";
    r.tolerance = cfg.tol.brakke_c * disc;
    bool pass = true;
    double worst = 0.0;
    for (const BrakkeReport& rep : out->brakke_reports) {
      if (rep.scale > 0.0) worst = std::max(worst, std::abs(rep.residual) / rep.scale);
      if (rep.residual < -rep.tol) pass = false;               // one-sidedness
      if (has_exact && std::abs(rep.residual) > rep.tol) pass = false;  // equality band
    }
    r.measured = worst;
    r.pass = pass;
    r.note = has_exact ? "equality band" : "one-sided only";
    out->checks.push_back(r);
  }

  const std::vector<int> times = sampled_interior_times(grid.num_times());
  if ((cfg.checks.identity || cfg.checks.motion_law) && times.empty()) {
    const CheckResult blocked{"", false, 0.0, 0.0,
                              "cannot run: time stencils need >= 3 stored time levels"};
    if (cfg.checks.identity) {
      out->checks.push_back(blocked);
      out->checks.back().name = "identity";
    }
    if (cfg.checks.motion_law) {
      out->checks.push_back(blocked);
      out->checks.back().name = "motion-law";
    }
  }
  if (cfg.checks.identity && !times.empty()) {
    CheckResult r;
    r.name = "identity";
    r.tolerance = cfg.tol.identity_c * disc;
    for (int ti : times) {
      const FieldSample v = velocity_from_motion_law(flow, scn.forcing, ti);
      const ResidualSummary s = summarize_interior(grid, identity_residual(flow, v, ti));
      r.measured = std::max(r.measured, s.max_interior);
    }
    r.pass = r.measured <= r.tolerance;
    r.note = "v = h + u_perp";
    out->checks.push_back(r);
  }

  if (cfg.checks.motion_law && !times.empty()) {
    CheckResult r;
    r.name = "motion-law";
    r.tolerance = cfg.tol.motion_law_c * disc;
    for (int ti : times) {
      const ResidualSummary s =
          summarize_interior(grid, motion_law_residual(flow, scn.forcing, ti));
      r.measured = std::max(r.measured, s.max_interior);
    }
    r.pass = r.measured <= r.tolerance;
    out->checks.push_back(r);
  }

  if (cfg.checks.duality) {
    CheckResult r;
    r.name = "duality";
    r.tolerance = cfg.tol.duality_c * std::pow(grid.spacing(), 1.5);
    const DiscreteVarifold V = build_varifold(flow, 0);
    const FieldSample h_field = mean_curvature_field(flow, 0);
    for (const VectorTestField& g : standard_vector_fields(grid, flow, 0, 10))
      r.measured = std::max(r.measured, mean_curvature_duality_residual(V, g, h_field));
    r.pass = r.measured <= r.tolerance;
    out->checks.push_back(r);
  }

  for (const NormRequestConfig& nr : cfg.norms) {
    const Eigen::VectorXd center = Eigen::VectorXd::Zero(grid.dim());
    const EstimateReport rep =
        nr.alpha > 0.0 ? holder_estimate_report(flow, scn.forcing, nr.alpha, nr.radius, center)
                       : estimate_report(flow, scn.forcing, nr.p, nr.q, nr.radius, center);
    out->norm_reports.push_back(rep);
    CheckResult r;
    char name[64];
    if (nr.alpha > 0.0)
      std::snprintf(name, sizeof(name), "estimate-holder-a%g-R%g", nr.alpha, nr.radius);
    else
      std::snprintf(name, sizeof(name), "estimate-p%g-q%g-R%g", nr.p, nr.q, nr.radius);
    r.name = name;
    r.measured = rep.ratio;
    r.tolerance = 0.0;
    r.pass = rep.degenerate || std::isfinite(rep.ratio);
    r.note = rep.degenerate ? "degenerate (zero right side)" : "reported, not asserted";
    out->checks.push_back(r);
  }

  out->all_pass = true;
  for (const CheckResult& c : out->checks) out->all_pass = out->all_pass && c.pass;
}

GraphFlow thin_flow(const GraphFlow& full, int stride) {
  const SpaceTimeGrid& g = full.grid();
  if ((g.num_times() - 1) % stride != 0)
    throw std::invalid_argument("'stride' must divide the number of time steps");
  std::vector<AxisRange> box;
  for (int d = 0; d < g.dim(); ++d) box.push_back(g.axis(d));
  SpaceTimeGrid thinned(g.dim(), g.codim(), box, g.spacing(), g.t_start(), g.t_end(),
                        g.dt() * stride);
  GraphFlow out(thinned, full.boundary_policy());
  for (int ti = 0; ti < thinned.num_times(); ++ti) out.set_slice(ti, full.slice_sample(ti * stride));
  return out;
}

}  // namespace

SimulationOutput simulate_scenario(const ScenarioConfig& cfg) {
  const Scenario scn = build_scenario(cfg);
  SolverConfig sc;
  sc.scheme = cfg.scheme;
  sc.cfl_sigma = cfg.cfl_sigma;
  sc.gradient_guard = cfg.gradient_guard;
  sc.boundary = scn.boundary_policy;

  FlowRunResult rr = run(scn.grid, scn.initial, sc, scn.forcing, scn.boundary);
  if (rr.report.termination != FlowRunReport::Termination::kCompleted)
    throw SolverError("flow run aborted: " + rr.report.message);

  SimulationOutput out;
  out.cfg = cfg;
  out.run_report = rr.report;
  if (cfg.stride > 1) {
    out.flow = std::make_shared<GraphFlow>(thin_flow(rr.flow, cfg.stride));
  } else {
    out.flow = std::make_shared<GraphFlow>(std::move(rr.flow));
  }
  run_all_checks(scn, *out.flow, &out);
  return out;
}

SimulationOutput verify_flow(const ScenarioConfig& cfg, GraphFlow flow) {
  const Scenario scn = build_scenario(cfg);
  flow.check_finite();
  SimulationOutput out;
  out.cfg = cfg;
  out.run_report.message = "verified from dump";
  out.flow = std::make_shared<GraphFlow>(std::move(flow));
  run_all_checks(scn, *out.flow, &out);
  return out;
}

nlohmann::json manifest_json(const SimulationOutput& out) {
  json j;
  j["tool_version"] = kVersion;
  j["config_hash"] = config_hash_hex(out.cfg);
  j["scenario"] = out.cfg.scenario;
  const SpaceTimeGrid& grid = out.flow->grid();
  j["grid"] = {{"k", grid.dim()},      {"n", grid.ambient_dim()},
               {"h", grid.spacing()},  {"dt", grid.dt()},
               {"nodes", grid.num_nodes()}, {"times", grid.num_times()}};
  const char* term = "completed";
  if (out.run_report.termination == FlowRunReport::Termination::kGradientGuard)
    term = "gradient-guard";
  if (!out.run_report.message.empty() && out.run_report.steps == 0) term = "verified-from-dump";
  j["run"] = {{"steps", out.run_report.steps},
              {"cfl_ratio", out.run_report.cfl_ratio},
              {"termination", term},
              {"wall_seconds", out.run_report.wall_seconds},
              {"max_gradient",
               out.run_report.max_gradient.empty() ? 0.0 : out.run_report.max_gradient.back()}};
  if (std::isfinite(out.solution_error)) j["solution_error"] = out.solution_error;
  json checks = json::array();
  for (const CheckResult& c : out.checks)
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"measured", c.measured},
                      {"tolerance", c.tolerance},
                      {"note", c.note}});
  j["checks"] = checks;
  j["pass"] = out.all_pass;
  return j;
}

nlohmann::json brakke_reports_json(const std::vector<BrakkeReport>& reports) {
  json arr = json::array();
  for (const BrakkeReport& r : reports)
    arr.push_back({{"phi_id", r.phi_id},
                   {"t1", r.t1},
                   {"t2", r.t2},
                   {"lhs", r.lhs},
                   {"rhs", r.rhs},
                   {"residual", r.residual},
                   {"scale", r.scale},
                   {"tol", r.tol}});
  return arr;
}

nlohmann::json norm_reports_json(const std::vector<EstimateReport>& reports, int level) {
  json arr = json::array();
  for (const EstimateReport& r : reports) {
    json row = {{"R", r.radius},
                {"lhs", r.lhs},
                {"rhs_parts", {r.rhs_f, r.rhs_u}},
                {"ratio", r.ratio},
                {"degenerate", r.degenerate},
                {"refinement_level", level}};
    if (r.alpha > 0.0) {  // Hoelder variant: sup norms, no (p, q)
      row["alpha"] = r.alpha;
    } else {
      row["p"] = r.p;
      row["q"] = r.q;
    }
    arr.push_back(row);
  }
  return arr;
}

std::vector<ConvergenceRow> run_convergence(const ScenarioConfig& cfg, int levels,
                                            std::vector<SimulationOutput>* outputs) {
  if (levels < 2) throw std::invalid_argument("convergence study needs at least 2 levels");
  std::vector<ConvergenceRow> rows;
  for (int lvl = 0; lvl < levels; ++lvl) {
    ScenarioConfig c = cfg;
    c.h = cfg.h / std::pow(2.0, lvl);
    if (cfg.dt > 0.0) c.dt = cfg.dt / std::pow(4.0, lvl);
    SimulationOutput out = simulate_scenario(c);

    ConvergenceRow row;
    row.level = lvl;
    row.h = out.flow->grid().spacing();
    row.dt = out.flow->grid().dt();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.error = std::isfinite(out.solution_error) ? out.solution_error : nan;
    row.brakke = row.identity = row.motion_law = row.duality = nan;
    for (const CheckResult& ck : out.checks) {
      if (ck.name == "brakke") row.brakke = ck.measured;
      if (ck.name == "identity") row.identity = ck.measured;
      if (ck.name == "motion-law") row.motion_law = ck.measured;
      if (ck.name == "duality") row.duality = ck.measured;
    }
    row.pass = out.all_pass;
    rows.push_back(row);
    if (outputs) outputs->push_back(std::move(out));
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << "level,h,dt,error,error_order,brakke_residual,brakke_order,identity_residual,"
        "identity_order,motion_law_residual,motion_law_order,duality_residual,duality_order\n";
  auto cell = [](double v) { return std::isfinite(v) ? format_g17(v) : std::string("n/a"); };
  auto order = [&](std::size_t i, double prev, double cur) -> std::string {
    if (i == 0 || !std::isfinite(prev) || !std::isfinite(cur) || prev < 1e-13 || cur < 1e-13)
      return "n/a";
    return format_g17(std::log2(prev / cur));
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ConvergenceRow& r = rows[i];
    const ConvergenceRow* p = i ? &rows[i - 1] : nullptr;
    os << r.level << ',' << format_g17(r.h) << ',' << format_g17(r.dt);
    os << ',' << cell(r.error) << ',' << order(i, p ? p->error : 0, r.error);
    os << ',' << cell(r.brakke) << ',' << order(i, p ? p->brakke : 0, r.brakke);
    os << ',' << cell(r.identity) << ',' << order(i, p ? p->identity : 0, r.identity);
    os << ',' << cell(r.motion_law) << ',' << order(i, p ? p->motion_law : 0, r.motion_law);
    os << ',' << cell(r.duality) << ',' << order(i, p ? p->duality : 0, r.duality);
    os << '\n';
  }
  return os.str();
}

}  // namespace graflow
