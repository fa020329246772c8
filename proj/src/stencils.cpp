#include "graflow/stencils.hpp"

#include <atomic>

#include "graflow/parallel.hpp"

namespace graflow {

namespace {

// First derivative of a multi-component node field along one axis.
// Central in the interior, one-sided 3-point second order on the faces.
FieldSample diff1_axis(const SpaceTimeGrid& grid, const FieldSample& src, int axis) {
  const std::size_t n = grid.num_nodes();
  const int nc = src.ncomp;
  const std::size_t st = grid.stride(axis);
  const int count = grid.nodes_per_axis(axis);
  const double inv2h = 1.0 / (2.0 * grid.spacing());
  FieldSample out(n, nc);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const int pos = static_cast<int>(idx / st) % count;
      for (int c = 0; c < nc; ++c) {
        double v;
        if (pos > 0 && pos < count - 1) {
          v = (src.at(idx + st, c) - src.at(idx - st, c)) * inv2h;
        } else if (pos == 0) {
          v = (-3.0 * src.at(idx, c) + 4.0 * src.at(idx + st, c) - src.at(idx + 2 * st, c)) *
              inv2h;
        } else {
          v = (3.0 * src.at(idx, c) - 4.0 * src.at(idx - st, c) + src.at(idx - 2 * st, c)) *
              inv2h;
        }
        out.at(idx, c) = v;
      }
    }
  });
  return out;
}

// Pure second derivative along one axis; 3-point central interior, 4-point
// one-sided on the faces (both exact on quadratics).
FieldSample diff2_axis(const SpaceTimeGrid& grid, const FieldSample& src, int axis) {
  const std::size_t n = grid.num_nodes();
  const int nc = src.ncomp;
  const std::size_t st = grid.stride(axis);
  const int count = grid.nodes_per_axis(axis);
  const double invh2 = 1.0 / (grid.spacing() * grid.spacing());
  FieldSample out(n, nc);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const int pos = static_cast<int>(idx / st) % count;
      for (int c = 0; c < nc; ++c) {
        double v;
        if (pos > 0 && pos < count - 1) {
          v = (src.at(idx + st, c) - 2.0 * src.at(idx, c) + src.at(idx - st, c)) * invh2;
        } else if (pos == 0) {
          v = (2.0 * src.at(idx, c) - 5.0 * src.at(idx + st, c) + 4.0 * src.at(idx + 2 * st, c) -
               src.at(idx + 3 * st, c)) *
              invh2;
        } else {
          v = (2.0 * src.at(idx, c) - 5.0 * src.at(idx - st, c) + 4.0 * src.at(idx - 2 * st, c) -
               src.at(idx - 3 * st, c)) *
              invh2;
        }
        out.at(idx, c) = v;
      }
    }
  });
  return out;
}

void require_slice(const GraphFlow& flow, int ti) {
  if (ti < 0 || ti >= flow.grid().num_times())
    throw std::invalid_argument("time index out of range");
}

}  // namespace

FieldSample gradient(const SpaceTimeGrid& grid, const FieldSample& slice) {
  const int k = grid.dim();
  const int m = slice.ncomp;
  FieldSample out(grid.num_nodes(), k * m);
  for (int d = 0; d < k; ++d) {
    const FieldSample dd = diff1_axis(grid, slice, d);
    for (std::size_t node = 0; node < grid.num_nodes(); ++node)
      for (int a = 0; a < m; ++a) out.at(node, d * m + a) = dd.at(node, a);
  }
  return out;
}

FieldSample gradient(const GraphFlow& flow, int time_index) {
  require_slice(flow, time_index);
  return gradient(flow.grid(), flow.slice_sample(time_index));
}

FieldSample hessian(const SpaceTimeGrid& grid, const FieldSample& slice) {
  const int k = grid.dim();
  const int m = slice.ncomp;
  const int npairs = k * (k + 1) / 2;
  FieldSample out(grid.num_nodes(), npairs * m);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      FieldSample dd;
      if (i == j) {
        dd = diff2_axis(grid, slice, i);
      } else {
        dd = diff1_axis(grid, diff1_axis(grid, slice, j), i);
      }
      const int pair = hessian_pair_index(i, j, k);
      for (std::size_t node = 0; node < grid.num_nodes(); ++node)
        for (int a = 0; a < m; ++a) out.at(node, pair * m + a) = dd.at(node, a);
    }
  }
  return out;
}

FieldSample hessian(const GraphFlow& flow, int time_index) {
  require_slice(flow, time_index);
  return hessian(flow.grid(), flow.slice_sample(time_index));
}

FieldSample time_derivative(const GraphFlow& flow, int time_index) {
  require_slice(flow, time_index);
  const SpaceTimeGrid& grid = flow.grid();
  const int times = grid.num_times();
  if (times < 3) throw std::invalid_argument("time derivative needs at least 3 time levels");
  const int m = grid.codim();
  const std::size_t n = grid.num_nodes();
  const double inv2dt = 1.0 / (2.0 * grid.dt());
  FieldSample out(n, m);
  const int ti = time_index;
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      for (int a = 0; a < m; ++a) {
        double v;
        if (ti > 0 && ti < times - 1) {
          v = (flow.value(ti + 1, node, a) - flow.value(ti - 1, node, a)) * inv2dt;
        } else if (ti == 0) {
          v = (-3.0 * flow.value(0, node, a) + 4.0 * flow.value(1, node, a) -
               flow.value(2, node, a)) *
              inv2dt;
        } else {
          v = (3.0 * flow.value(ti, node, a) - 4.0 * flow.value(ti - 1, node, a) +
               flow.value(ti - 2, node, a)) *
              inv2dt;
        }
        out.at(node, a) = v;
      }
    }
  });
  return out;
}

QuadratureResult cell_quadrature(const SpaceTimeGrid& grid, const FieldSample& field,
                                 const FieldSample& weights, const RegionMask& mask) {
  if (field.num_nodes != grid.num_nodes() || field.ncomp != 1)
    throw std::invalid_argument("cell_quadrature expects a scalar field on the grid");
  const bool has_w = !weights.data.empty();
  if (has_w && (weights.num_nodes != grid.num_nodes() || weights.ncomp != 1))
    throw std::invalid_argument("cell_quadrature weight shape mismatch");

  QuadratureResult res;
  std::atomic<bool> any{false};
  std::atomic<bool> excluded{false};
  // The mask scan is cheap relative to the sum; do it inline and keep the
  // reduction deterministic.
  res.value = block_reduce(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t node = lo; node < hi; ++node) {
      if (mask.kind != RegionMask::Kind::kFull && !mask.contains(grid.node_point(node))) {
        excluded.store(true, std::memory_order_relaxed);
        continue;
      }
      any.store(true, std::memory_order_relaxed);
      const double w = has_w ? weights.at(node, 0) : 1.0;
      acc += field.at(node, 0) * w * grid.quad_weight(node);
    }
    return acc;
  });
  res.empty_region = !any.load();
  res.clipped = excluded.load();
  if (res.empty_region) res.value = 0.0;
  return res;
}

GradientMatrix gradient_at(const FieldSample& grad, std::size_t node, int k, int codim) {
  GradientMatrix p;
  p.entries = Matrix(k, codim);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < codim; ++a) p.entries(i, a) = grad.at(node, i * codim + a);
  return p;
}

HessianTensor hessian_at(const FieldSample& hess, std::size_t node, int k, int codim) {
  HessianTensor q(k, codim);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      const int pair = hessian_pair_index(i, j, k);
      for (int a = 0; a < codim; ++a) q.set(i, j, a, hess.at(node, pair * codim + a));
    }
  return q;
}

}  // namespace graflow
