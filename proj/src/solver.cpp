#include "graflow/solver.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "graflow/parallel.hpp"
#include "graflow/stencils.hpp"

namespace graflow {

namespace {

double max_gradient_norm(const SpaceTimeGrid& grid, const FieldSample& grad) {
  double best = 0.0;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    double s = 0.0;
    for (int c = 0; c < grad.ncomp; ++c) s += grad.at(node, c) * grad.at(node, c);
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

// d_t f^a = g^{ij} d_ij f^a + U^a evaluated from a slice; the g^{ij}Q_ij
// contraction and the forcing term share the per-node metric work.
FieldSample pde_rhs(const SpaceTimeGrid& grid, const FieldSample& slice, double t,
                    const ForcingSpec& forcing) {
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  const FieldSample grad = gradient(grid, slice);
  const FieldSample hess = hessian(grid, slice);
  FieldSample rhs(grid.num_nodes(), m);
  const bool forced = !forcing.is_zero();
  parallel_for(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    Eigen::VectorXd point(n);
    for (std::size_t node = lo; node < hi; ++node) {
      if (!grid.is_interior(node)) continue;
      const GradientMatrix p = gradient_at(grad, node, k, m);
      const HessianTensor q = hessian_at(hess, node, k, m);
      const MetricPack mp = induced_metric(p);
      for (int a = 0; a < m; ++a) {
        double tr = 0.0;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) tr += mp.g_inv(i, j) * q(i, j, a);
        rhs.at(node, a) = tr;
      }
      if (forced) {
        point.head(k) = grid.node_point(node);
        for (int a = 0; a < m; ++a) point(k + a) = slice.at(node, a);
        const Eigen::VectorXd u = forcing.evaluate(point, k, t);
        const ProjectionPair planes = graph_tangent_plane(p);
        const Vector uf = forcing_term(p, planes, u);
        for (int a = 0; a < m; ++a) rhs.at(node, a) += uf(a);
      }
    }
  });
  return rhs;
}

void fill_faces(const SpaceTimeGrid& grid, const FieldSample& slice, double t_next,
                const SolverConfig& config, const BoundaryValues& boundary, FieldSample* next) {
  const int m = grid.codim();
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    if (!grid.is_face_node(node)) continue;
    if (config.boundary == BoundaryPolicy::kDirichletExact) {
      if (!boundary) throw SolverError("dirichlet-exact boundary mode needs boundary data");
      const Eigen::VectorXd x = grid.node_point(node);
      for (int a = 0; a < m; ++a) next->at(node, a) = boundary(x, t_next, a);
    } else {
      for (int a = 0; a < m; ++a) next->at(node, a) = slice.at(node, a);
    }
  }
}

FieldSample explicit_step(const SpaceTimeGrid& grid, const FieldSample& slice, double t,
                          const SolverConfig& config, const ForcingSpec& forcing,
                          const BoundaryValues& boundary) {
  const FieldSample rhs = pde_rhs(grid, slice, t, forcing);
  const double dt = grid.dt();
  FieldSample next(grid.num_nodes(), grid.codim());
  parallel_for(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node)
      for (int a = 0; a < grid.codim(); ++a)
        next.at(node, a) = slice.at(node, a) + dt * rhs.at(node, a);
  });
  fill_faces(grid, slice, t + dt, config, boundary, &next);
  return next;
}

FieldSample semi_implicit_step(const SpaceTimeGrid& grid, const FieldSample& slice, double t,
                               const SolverConfig& config, const ForcingSpec& forcing,
                               const BoundaryValues& boundary) {
  const int k = grid.dim(), m = grid.codim();
  const double dt = grid.dt();
  const double h2 = grid.spacing() * grid.spacing();
  const std::size_t nn = grid.num_nodes();

  const FieldSample grad = gradient(grid, slice);
  const FieldSample hess = hessian(grid, slice);
  const FieldSample rhs_field = pde_rhs(grid, slice, t, forcing);

  // rhs_field already contains g^{ij}Q_ij + U; the implicit right side only
  // needs U, so subtract the explicit curvature part per node below. This
  // keeps one code path for the forcing evaluation.
  std::vector<std::ptrdiff_t> unknown(nn, -1);
  std::vector<std::size_t> nodes;
  for (std::size_t node = 0; node < nn; ++node) {
    if (grid.is_interior(node)) {
      unknown[node] = static_cast<std::ptrdiff_t>(nodes.size());
      nodes.push_back(node);
    }
  }
  const std::size_t nun = nodes.size();

  FieldSample next(nn, m);
  fill_faces(grid, slice, t + dt, config, boundary, &next);
  auto face_value = [&](std::size_t node, int a) { return next.at(node, a); };

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nun * (1 + 2 * k + 2 * k * (k - 1)));
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nun, m);
  Eigen::MatrixXd guess(nun, m);

  for (std::size_t r = 0; r < nun; ++r) {
    const std::size_t node = nodes[r];
    const GradientMatrix p = gradient_at(grad, node, k, m);
    const MetricPack mp = induced_metric(p);

    // curvature part of rhs_field = g^{ij} Q_ij; U = rhs_field - curvature.
    // We re-derive U by subtracting the frozen-coefficient contraction.
    double diag = 1.0;
    auto add_entry = [&](std::size_t other, double coef) {
      if (unknown[other] >= 0) {
        trips.emplace_back(static_cast<int>(r), static_cast<int>(unknown[other]), coef);
      } else {
        for (int a = 0; a < m; ++a) rhs(r, a) -= coef * face_value(other, a);
      }
    };

    for (int i = 0; i < k; ++i) {
      const double gii = mp.g_inv(i, i);
      diag += dt * 2.0 * gii / h2;
      add_entry(node + grid.stride(i), -dt * gii / h2);
      add_entry(node - grid.stride(i), -dt * gii / h2);
    }
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const double gij = mp.g_inv(i, j);
        if (gij == 0.0) continue;
        const double c = dt * gij / (2.0 * h2);
        add_entry(node + grid.stride(i) + grid.stride(j), -c);
        add_entry(node - grid.stride(i) - grid.stride(j), -c);
        add_entry(node + grid.stride(i) - grid.stride(j), c);
        add_entry(node - grid.stride(i) + grid.stride(j), c);
      }
    }
    trips.emplace_back(static_cast<int>(r), static_cast<int>(r), diag);

    const HessianTensor q = hessian_at(hess, node, k, m);
    for (int a = 0; a < m; ++a) {
      double tr = 0.0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) tr += mp.g_inv(i, j) * q(i, j, a);
      const double u_term = rhs_field.at(node, a) - tr;
      rhs(r, a) += slice.at(node, a) + dt * u_term;
      guess(r, a) = slice.at(node, a) + dt * rhs_field.at(node, a);
    }
  }

  Eigen::SparseMatrix<double> A(static_cast<int>(nun), static_cast<int>(nun));
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> solver;
  solver.setTolerance(1e-10);
  solver.setMaxIterations(static_cast<int>(20 * nun + 100));
  solver.compute(A);

  for (int a = 0; a < m; ++a) {
    Eigen::VectorXd sol = solver.solveWithGuess(rhs.col(a), Eigen::VectorXd(guess.col(a)));
    if (solver.info() != Eigen::Success)
      throw SolverError("semi-implicit linear solve did not converge");
    for (std::size_t r = 0; r < nun; ++r) next.at(nodes[r], a) = sol(static_cast<int>(r));
  }
  return next;
}

}  // namespace

const char* to_string(Scheme s) {
  return s == Scheme::kExplicit ? "explicit" : "semi-implicit";
}

Vector forcing_term(const GradientMatrix& P, const ProjectionPair& planes,
                    const Vector& u_at_graph) {
  const int k = P.dim(), m = P.codim();
  if (u_at_graph.size() != k + m)
    throw std::invalid_argument("forcing vector has wrong ambient dimension");
  const Vector u_perp = planes.graph_perp * u_at_graph;
  Vector out(m);
  for (int a = 0; a < m; ++a) {
    double v = u_perp(k + a);
    for (int j = 0; j < k; ++j) v -= u_perp(j) * P.entries(j, a);
    out(a) = v;
  }
  return out;
}

FieldSample step(const SpaceTimeGrid& grid, const FieldSample& slice, double t,
                 const SolverConfig& config, const ForcingSpec& forcing,
                 const BoundaryValues& boundary) {
  if (slice.num_nodes != grid.num_nodes() || slice.ncomp != grid.codim())
    throw std::invalid_argument("slice shape mismatch");
  if (config.scheme == Scheme::kExplicit) {
    const double limit = config.cfl_sigma * grid.spacing() * grid.spacing() / (2.0 * grid.dim());
    if (grid.dt() > limit * (1.0 + 1e-9))
      throw SolverError("CFL violation: dt exceeds sigma h^2 / (2k)");
    return explicit_step(grid, slice, t, config, forcing, boundary);
  }
  return semi_implicit_step(grid, slice, t, config, forcing, boundary);
}

FlowRunResult run(const SpaceTimeGrid& grid, const FieldSample& initial,
                  const SolverConfig& config, const ForcingSpec& forcing,
                  const BoundaryValues& boundary) {
  if (!(config.cfl_sigma > 0.0) || config.cfl_sigma > 1.0)
    throw std::invalid_argument("cfl_sigma must lie in (0, 1]");
  if (!(config.gradient_guard > 0.0))
    throw std::invalid_argument("gradient_guard must be positive");
  if (forcing.ambient_dim() != grid.ambient_dim())
    throw std::invalid_argument("forcing dimension does not match grid");

  const auto t0 = std::chrono::steady_clock::now();
  FlowRunResult result{GraphFlow(grid, config.boundary), FlowRunReport{}};
  GraphFlow& flow = result.flow;
  FlowRunReport& report = result.report;
  report.cfl_ratio = grid.dt() * 2.0 * grid.dim() / (grid.spacing() * grid.spacing());

  flow.set_slice(0, initial);
  flow.check_finite();

  FieldSample current = initial;
  report.max_gradient.push_back(max_gradient_norm(grid, gradient(grid, current)));
  if (report.max_gradient.back() > config.gradient_guard) {
    report.termination = FlowRunReport::Termination::kGradientGuard;
    report.message = "initial data exceeds the gradient guard";
    return result;
  }

  for (int m = 0; m + 1 < grid.num_times(); ++m) {
    FieldSample next = step(grid, current, grid.time(m), config, forcing, boundary);
    flow.set_slice(m + 1, next);
    current = std::move(next);
    ++report.steps;
    report.max_gradient.push_back(max_gradient_norm(grid, gradient(grid, current)));
    if (report.max_gradient.back() > config.gradient_guard) {
      report.termination = FlowRunReport::Termination::kGradientGuard;
      report.message = "gradient guard tripped at t=" + std::to_string(grid.time(m + 1));
      const auto t1 = std::chrono::steady_clock::now();
      report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
      return result;
    }
  }
  report.termination = FlowRunReport::Termination::kCompleted;
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

}  // namespace graflow
