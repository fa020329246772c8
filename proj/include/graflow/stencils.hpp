#pragma once

#include "graflow/geometry.hpp"
#include "graflow/grid.hpp"

namespace graflow {

/// Spatial gradient of a flow slice by second-order differences: central in
/// the interior, one-sided 3-point on box faces. Component layout i*codim+a.
FieldSample gradient(const GraphFlow& flow, int time_index);
FieldSample gradient(const SpaceTimeGrid& grid, const FieldSample& slice);

/// Spatial Hessian of a flow slice, second order, symmetric by construction:
/// dedicated 3-point (interior) / 4-point (face) stencils on the diagonal,
/// composed first derivatives for mixed terms (the central x central
/// composition is the 4-point cross stencil). Component layout: packed upper
/// triangle pair index times codim plus a, matching HessianTensor.
FieldSample hessian(const GraphFlow& flow, int time_index);
FieldSample hessian(const SpaceTimeGrid& grid, const FieldSample& slice);

/// Time derivative: central interiorly, one-sided second order at the ends.
/// Requires at least 3 stored time levels.
FieldSample time_derivative(const GraphFlow& flow, int time_index);

struct QuadratureResult {
  double value = 0.0;
  bool empty_region = false;  // warning flag: mask selected no nodes
  bool clipped = false;       // mask excluded in-box nodes (O(h) region error)
};

/// Composite trapezoid of field*weights over the masked box (node-center
/// rule). `weights` may be empty (treated as 1); both samples must be scalar.
QuadratureResult cell_quadrature(const SpaceTimeGrid& grid, const FieldSample& field,
                                 const FieldSample& weights, const RegionMask& mask);

// Pointwise adapters between sampled derivative fields and the geometry
// types.
GradientMatrix gradient_at(const FieldSample& grad, std::size_t node, int k, int codim);
HessianTensor hessian_at(const FieldSample& hess, std::size_t node, int k, int codim);

/// Packed pair index used by the hessian sample layout (i <= j).
inline int hessian_pair_index(int i, int j, int k) {
  if (i > j) std::swap(i, j);
  return i * k - i * (i - 1) / 2 + (j - i);
}

}  // namespace graflow
