#pragma once

#include <functional>
#include <string>

#include "graflow/forcing.hpp"
#include "graflow/geometry.hpp"
#include "graflow/grid.hpp"

namespace graflow {

enum class Scheme { kExplicit, kSemiImplicit };

const char* to_string(Scheme s);

struct SolverConfig {
  Scheme scheme = Scheme::kExplicit;
  /// Explicit CFL safety factor: the step must satisfy dt <= sigma h^2/(2k),
  /// which is uniformly valid because eig_max(g_inv) <= 1.
  double cfl_sigma = 0.9;
  /// Abort threshold on max |grad f|_F: past it the graphical regime (and
  /// every estimate that depends on it) is gone, so stop instead of stepping on.
  double gradient_guard = 10.0;
  BoundaryPolicy boundary = BoundaryPolicy::kDirichletExact;
};

/// Dirichlet data for face nodes: component `comp` of f at (x, t).
using BoundaryValues = std::function<double(const Eigen::VectorXd& x, double t, int comp)>;

struct FlowRunReport {
  enum class Termination { kCompleted, kGradientGuard };
  int steps = 0;
  double cfl_ratio = 0.0;  // dt * 2k / h^2
  std::vector<double> max_gradient;  // per stored slice, max_F |grad f|
  double wall_seconds = 0.0;
  Termination termination = Termination::kCompleted;
  std::string message;
};

struct FlowRunResult {
  GraphFlow flow;
  FlowRunReport report;
};

/// Forcing term of the graph PDE: U^a = (u_perp)^{k+a} - sum_j (u_perp)^j P_j^a
/// with u_perp = (I - S) u.
Vector forcing_term(const GradientMatrix& P, const ProjectionPair& planes,
                    const Vector& u_at_graph);

/// One time step of d_t f^a = g^{ij} d_ij f^a + U^a from the slice at time t.
/// Explicit Euler uses coefficients from the current slice; semi-implicit
/// freezes g^{ij} at the current slice and solves (I - dt L) f+ = f + dt U
/// with an iterative sparse solver to relative residual 1e-10. Face nodes
/// come from `boundary` (exact mode) or stay fixed (frozen mode).
FieldSample step(const SpaceTimeGrid& grid, const FieldSample& slice, double t,
                 const SolverConfig& config, const ForcingSpec& forcing,
                 const BoundaryValues& boundary);

/// Runs the flow across the grid's whole time range, storing every step.
/// Deterministic for a fixed config. On a gradient-guard trip the run stops
/// early and the report says so; CFL violations and linear-solver breakdowns
/// throw SolverError.
FlowRunResult run(const SpaceTimeGrid& grid, const FieldSample& initial,
                  const SolverConfig& config, const ForcingSpec& forcing,
                  const BoundaryValues& boundary);

}  // namespace graflow
