#include "graflow/varifold.hpp"

#include <cmath>

#include "graflow/parallel.hpp"

namespace graflow {

Eigen::VectorXd DiscreteVarifold::position(std::size_t node) const {
  const int n = ambient_dim();
  Eigen::VectorXd x(n);
  for (int c = 0; c < n; ++c) x(c) = positions[node * n + c];
  return x;
}

Eigen::MatrixXd DiscreteVarifold::tangent(std::size_t node) const {
  const int n = ambient_dim();
  Eigen::MatrixXd s(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) s(r, c) = tangents[(node * n + r) * n + c];
  return s;
}

DiscreteVarifold build_varifold(const SpaceTimeGrid& grid, const FieldSample& slice, double t) {
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  const std::size_t nn = grid.num_nodes();
  if (slice.num_nodes != nn || slice.ncomp != m)
    throw std::invalid_argument("varifold slice shape mismatch");

  DiscreteVarifold V;
  V.grid = &grid;
  V.t = t;
  V.k = k;
  V.codim = m;
  V.positions.resize(nn * n);
  V.tangents.resize(nn * n * n);
  V.sqrt_g.resize(nn);
  V.area_weight.resize(nn);
  V.quad_factor.resize(nn);

  const FieldSample grad = gradient(grid, slice);
  const double hk = std::pow(grid.spacing(), k);
  const TangentFrame frame = TangentFrame::canonical(n, k);

  parallel_for(nn, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      const Eigen::VectorXd x = grid.node_point(node);
      for (int d = 0; d < k; ++d) V.positions[node * n + d] = x(d);
      for (int a = 0; a < m; ++a) V.positions[node * n + k + a] = slice.at(node, a);

      const GradientMatrix p = gradient_at(grad, node, k, m);
      const MetricPack mp = induced_metric(p);
      const ProjectionPair planes = graph_tangent_plane(frame, p, mp);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) V.tangents[(node * n + r) * n + c] = planes.graph(r, c);

      V.sqrt_g[node] = mp.sqrt_g;
      V.area_weight[node] = mp.sqrt_g * hk;
      V.quad_factor[node] = grid.quad_weight(node) / hk;
    }
  });
  return V;
}

DiscreteVarifold build_varifold(const GraphFlow& flow, int time_index) {
  return build_varifold(flow.grid(), flow.slice_sample(time_index),
                        flow.grid().time(time_index));
}

FieldSample mean_curvature_field(const SpaceTimeGrid& grid, const FieldSample& slice) {
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  const FieldSample grad = gradient(grid, slice);
  const FieldSample hess = hessian(grid, slice);
  FieldSample out(grid.num_nodes(), n);
  parallel_for(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      const GradientMatrix p = gradient_at(grad, node, k, m);
      const HessianTensor q = hessian_at(hess, node, k, m);
      const Vector h = mean_curvature_of_graph(p, q);
      for (int c = 0; c < n; ++c) out.at(node, c) = h(c);
    }
  });
  return out;
}

FieldSample mean_curvature_field(const GraphFlow& flow, int time_index) {
  return mean_curvature_field(flow.grid(), flow.slice_sample(time_index));
}

double weight_integral(const DiscreteVarifold& V,
                       const std::function<double(const Eigen::VectorXd&)>& phi) {
  return block_reduce(V.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t node = lo; node < hi; ++node) acc += phi(V.position(node)) * V.weight(node);
    return acc;
  });
}

double first_variation(const DiscreteVarifold& V, const VectorTestField& g_field) {
  g_field.bump.require_support_inside(*V.grid, V.grid->spacing());
  const int n = V.ambient_dim();
  return block_reduce(V.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t node = lo; node < hi; ++node) {
      const Eigen::VectorXd pos = V.position(node);
      const Eigen::MatrixXd jac = g_field.jacobian(pos);
      // div_S g = sum_{ab} S_ab dg^b/dx^a = S : J with J(b,a) = dg^b/dx^a.
      double div = 0.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) div += V.tangents[(node * n + r) * n + c] * jac(c, r);
      acc += div * V.weight(node);
    }
    return acc;
  });
}

double mean_curvature_duality_residual(const DiscreteVarifold& V, const VectorTestField& g_field,
                                       const FieldSample& h_field) {
  if (h_field.num_nodes != V.num_nodes() || h_field.ncomp != V.ambient_dim())
    throw std::invalid_argument("mean curvature field shape mismatch");
  const double delta_v = first_variation(V, g_field);
  const int n = V.ambient_dim();
  const double pairing = block_reduce(V.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t node = lo; node < hi; ++node) {
      const Eigen::VectorXd g = g_field.value(V.position(node));
      double dot = 0.0;
      for (int c = 0; c < n; ++c) dot += g(c) * h_field.at(node, c);
      acc += dot * V.weight(node);
    }
    return acc;
  });
  return std::abs(delta_v + pairing) / std::max(1.0, std::abs(delta_v));
}

double h_l2_norm(const SpaceTimeMeasure& M, const RegionMask& mask, const TimeWindow& window) {
  const GraphFlow& flow = M.flow();
  const SpaceTimeGrid& grid = flow.grid();
  double acc = 0.0;
  for (int ti = 0; ti < grid.num_times(); ++ti) {
    const double t = grid.time(ti);
    if (t < window.t_lo - 1e-12 || t > window.t_hi + 1e-12) continue;
    const DiscreteVarifold V = M.slice(ti);
    const FieldSample h = mean_curvature_field(flow, ti);
    const int n = grid.ambient_dim();
    double slice_sum = 0.0;
    for (std::size_t node = 0; node < V.num_nodes(); ++node) {
      if (!mask.contains(grid.node_point(node))) continue;
      double h2 = 0.0;
      for (int c = 0; c < n; ++c) h2 += h.at(node, c) * h.at(node, c);
      slice_sum += h2 * V.weight(node);
    }
    acc += slice_sum * grid.dt();
  }
  return std::sqrt(acc);
}

}  // namespace graflow
