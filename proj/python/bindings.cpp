#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "graflow/brakke.hpp"
#include "graflow/scenario.hpp"

namespace py = pybind11;
using namespace graflow;

namespace {

GradientMatrix as_gradient(const Eigen::MatrixXd& p) { return GradientMatrix(p); }

HessianTensor as_hessian(const py::array_t<double>& q) {
  if (q.ndim() != 3 || q.shape(0) != q.shape(1))
    throw std::invalid_argument("hessian must have shape (k, k, codim)");
  const int k = static_cast<int>(q.shape(0));
  const int m = static_cast<int>(q.shape(2));
  auto r = q.unchecked<3>();
  HessianTensor out(k, m);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j)
      for (int a = 0; a < m; ++a) {
        if (std::abs(r(i, j, a) - r(j, i, a)) > 1e-12)
          throw std::invalid_argument("hessian must be symmetric in its first two indices");
        out.set(i, j, a, r(i, j, a));
      }
  return out;
}

py::dict metric_dict(const MetricPack& mp) {
  py::dict d;
  d["g"] = mp.g;
  d["g_inv"] = mp.g_inv;
  d["sqrt_g"] = mp.sqrt_g;
  d["eig_min"] = mp.eig_min;
  d["eig_max"] = mp.eig_max;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "graflow: graphical mean curvature flow with weak-formulation checks";
  m.attr("__version__") = kVersion;

  m.def(
      "induced_metric",
      [](const Eigen::MatrixXd& p) { return metric_dict(induced_metric(as_gradient(p))); },
      py::arg("gradient"),
      "Metric pack of g = I + P P^T: g, g_inv, sqrt_g, eig_min/eig_max of g_inv.");

  m.def(
      "tangent_projection",
      [](const Eigen::MatrixXd& p) { return graph_tangent_plane(as_gradient(p)).graph; },
      py::arg("gradient"), "Orthogonal projection S onto the graph tangent plane.");

  m.def(
      "project_normal",
      [](const Eigen::VectorXd& u, const Eigen::MatrixXd& p) {
        return project_normal(u, graph_tangent_plane(as_gradient(p)));
      },
      py::arg("u"), py::arg("gradient"), "(I - S) u.");

  m.def(
      "mean_curvature",
      [](const Eigen::MatrixXd& p, const py::array_t<double>& q) {
        return mean_curvature_of_graph(as_gradient(p), as_hessian(q));
      },
      py::arg("gradient"), py::arg("hessian"),
      "Ambient mean curvature vector of the graph from pointwise (P, Q).");

  m.def(
      "legendre_hadamard",
      [](const Eigen::MatrixXd& p, const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) {
        const LegendreHadamardResult r = legendre_hadamard(as_gradient(p), xi, eta);
        return py::make_tuple(r.lhs, r.rhs);
      },
      py::arg("gradient"), py::arg("xi"), py::arg("eta"),
      "Legendre-Hadamard form (lhs, sharp lower bound rhs).");

  m.def(
      "run_scenario",
      [](const std::string& config_json) {
        const SimulationOutput out = simulate_scenario(parse_config(config_json));
        return manifest_json(out).dump();
      },
      py::arg("config_json"),
      "Run a scenario config (JSON text) and return the manifest as a JSON string.");

  m.def(
      "flow_values",
      [](const std::string& config_json) {
        const SimulationOutput out = simulate_scenario(parse_config(config_json));
        const GraphFlow& flow = *out.flow;
        const SpaceTimeGrid& grid = flow.grid();
        const int T = grid.num_times();
        const auto N = static_cast<py::ssize_t>(grid.num_nodes());
        const int k = grid.dim(), mm = grid.codim();
        py::array_t<double> times(T);
        py::array_t<double> points({N, static_cast<py::ssize_t>(k)});
        py::array_t<double> values({static_cast<py::ssize_t>(T), N, static_cast<py::ssize_t>(mm)});
        auto tw = times.mutable_unchecked<1>();
        auto pw = points.mutable_unchecked<2>();
        auto vw = values.mutable_unchecked<3>();
        for (int ti = 0; ti < T; ++ti) tw(ti) = grid.time(ti);
        for (py::ssize_t node = 0; node < N; ++node) {
          const Eigen::VectorXd x = grid.node_point(static_cast<std::size_t>(node));
          for (int d = 0; d < k; ++d) pw(node, d) = x(d);
          for (int ti = 0; ti < T; ++ti)
            for (int a = 0; a < mm; ++a)
              vw(ti, node, a) = flow.value(ti, static_cast<std::size_t>(node), a);
        }
        return py::make_tuple(times, points, values);
      },
      py::arg("config_json"),
      "Run a scenario and return (times, node_points, values) arrays.");
}
