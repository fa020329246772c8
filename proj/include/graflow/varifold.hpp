#pragma once

#include <functional>

#include "graflow/geometry.hpp"
#include "graflow/grid.hpp"
#include "graflow/stencils.hpp"
#include "graflow/test_function.hpp"

namespace graflow {

/// One time slice of a graph flow as a unit-density quadrature varifold:
/// ambient node positions, tangent projections S, and area weights
/// sqrt(g) h^k. `quad_factor` carries the composite-trapezoid end factors;
/// integration uses area_weight * quad_factor.
struct DiscreteVarifold {
  const SpaceTimeGrid* grid = nullptr;
  double t = 0.0;
  int k = 0;
  int codim = 0;
  std::vector<double> positions;    // [node][n]
  std::vector<double> tangents;     // [node][n*n], S row-major
  std::vector<double> sqrt_g;       // [node]
  std::vector<double> area_weight;  // sqrt(g) h^k per node, always >= h^k
  std::vector<double> quad_factor;  // trapezoid end factors in (0, 1]

  std::size_t num_nodes() const { return sqrt_g.size(); }
  int ambient_dim() const { return k + codim; }
  Eigen::VectorXd position(std::size_t node) const;
  Eigen::MatrixXd tangent(std::size_t node) const;
  double weight(std::size_t node) const { return area_weight[node] * quad_factor[node]; }
};

DiscreteVarifold build_varifold(const GraphFlow& flow, int time_index);
DiscreteVarifold build_varifold(const SpaceTimeGrid& grid, const FieldSample& slice, double t);

/// Ambient mean curvature vector per node of a slice, from the discrete
/// gradient and Hessian.
FieldSample mean_curvature_field(const GraphFlow& flow, int time_index);
FieldSample mean_curvature_field(const SpaceTimeGrid& grid, const FieldSample& slice);

/// integral of phi d|V|: sum of phi(position) * weight.
double weight_integral(const DiscreteVarifold& V,
                       const std::function<double(const Eigen::VectorXd&)>& phi);

/// First variation deltaV(g) = integral of S : Dg dV for the analytic test
/// field family. The field's tangent support must stay one grid spacing
/// inside the box (throws std::invalid_argument otherwise): boundary terms
/// would corrupt the duality identity.
double first_variation(const DiscreteVarifold& V, const VectorTestField& g_field);

/// | deltaV(g) + integral g . h d|V| | / max(1, |deltaV(g)|), h supplied per
/// node (layout of mean_curvature_field).
double mean_curvature_duality_residual(const DiscreteVarifold& V, const VectorTestField& g_field,
                                       const FieldSample& h_field);

/// The space-time measure d mu = d|V_t| dt of a flow: slices built on demand.
class SpaceTimeMeasure {
 public:
  explicit SpaceTimeMeasure(const GraphFlow& flow) : flow_(&flow) {}
  const GraphFlow& flow() const { return *flow_; }
  int num_slices() const { return flow_->grid().num_times(); }
  double dt() const { return flow_->grid().dt(); }
  double time(int ti) const { return flow_->grid().time(ti); }
  DiscreteVarifold slice(int ti) const { return build_varifold(*flow_, ti); }

 private:
  const GraphFlow* flow_;
};

/// (sum_t sum_nodes |h|^2 w dt)^{1/2} over a spatial mask and time window.
double h_l2_norm(const SpaceTimeMeasure& M, const RegionMask& mask, const TimeWindow& window);

}  // namespace graflow
