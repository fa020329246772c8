#pragma once

#include <string>
#include <vector>

#include "graflow/forcing.hpp"
#include "graflow/varifold.hpp"

namespace graflow {

enum class VelocityProvenance { kFromGraphMotion, kFromMotionLaw };

/// Normal velocity of the moving graph: v = (I - S)(0, d_t f). Satisfies
/// S v = 0 by construction. Layout: n ambient components per node.
FieldSample velocity_from_graph(const GraphFlow& flow, int time_index);

/// Motion-law velocity v = h + (I - S) u(x + f, t); both summands are normal,
/// so S v = 0 holds to roundoff as well.
FieldSample velocity_from_motion_law(const GraphFlow& flow, const ForcingSpec& forcing,
                                     int time_index);

/// Per-slice velocity provider for space-time integrals.
struct VelocityField {
  VelocityProvenance provenance = VelocityProvenance::kFromGraphMotion;
  const GraphFlow* flow = nullptr;
  const ForcingSpec* forcing = nullptr;  // motion-law only

  FieldSample at(int time_index) const;
};

VelocityField graph_motion_velocity(const GraphFlow& flow);
VelocityField motion_law_velocity(const GraphFlow& flow, const ForcingSpec& forcing);

/// One evaluated instance of the integral inequality: lhs is the weight
/// measure difference of phi between t2 and t1, rhs the space-time integral
/// of (-phi h + grad phi) . v + d_t phi, residual = rhs - lhs. scale is
/// max(|lhs|, |rhs|, mu(supp phi)); tol = c_report (h^2 + dt) scale.
struct BrakkeReport {
  std::string phi_id;
  double t1 = 0.0, t2 = 0.0;
  double lhs = 0.0, rhs = 0.0;
  double residual = 0.0;
  double scale = 0.0;
  double tol = 0.0;
};

struct BrakkeWindow {
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Evaluates every (phi, window) pair in one sweep over the slices. The
/// velocity term uses trapezoid-in-time with per-slice values (v is
/// piecewise constant per slice); the d_t phi term integrates the time block
/// exactly per interval at frozen slice positions, symmetrized over the two
/// interval ends, so static flows telescope to the lhs exactly.
std::vector<BrakkeReport> brakke_residual_batch(const SpaceTimeMeasure& M,
                                                const VelocityField& velocity,
                                                const std::vector<TestFunction>& phis,
                                                const std::vector<BrakkeWindow>& windows,
                                                double c_report);

BrakkeReport brakke_residual(const SpaceTimeMeasure& M, const VelocityField& velocity,
                             const TestFunction& phi, double t1, double t2, double c_report);

/// Nodewise residual of the identity d_t f = T_perp v(x+f) - grad_{T v} f,
/// with v sampled along the graph at this time. Scalar per node.
FieldSample identity_residual(const GraphFlow& flow, const FieldSample& v_slice, int time_index);

/// Nodewise |velocity_from_graph - velocity_from_motion_law|: the discrete
/// check that a flow solves v = h + u_perp in the strong sense.
FieldSample motion_law_residual(const GraphFlow& flow, const ForcingSpec& forcing,
                                int time_index);

struct ResidualSummary {
  double max_interior = 0.0;
  double l2_interior = 0.0;
};

/// Max and L2 (plain dx quadrature) of a scalar sample over interior nodes.
ResidualSummary summarize_interior(const SpaceTimeGrid& grid, const FieldSample& scalar);

}  // namespace graflow
