#include "graflow/brakke.hpp"

#include <cmath>

#include "graflow/parallel.hpp"
#include "graflow/solver.hpp"

namespace graflow {

FieldSample velocity_from_graph(const GraphFlow& flow, int time_index) {
  const SpaceTimeGrid& grid = flow.grid();
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  const FieldSample grad = gradient(flow, time_index);
  const FieldSample ft = time_derivative(flow, time_index);
  const TangentFrame frame = TangentFrame::canonical(n, k);
  FieldSample out(grid.num_nodes(), n);
  parallel_for(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    Eigen::VectorXd w(n);
    for (std::size_t node = lo; node < hi; ++node) {
      const GradientMatrix p = gradient_at(grad, node, k, m);
      const ProjectionPair planes = graph_tangent_plane(frame, p, induced_metric(p));
      w.setZero();
      for (int a = 0; a < m; ++a) w(k + a) = ft.at(node, a);
      const Eigen::VectorXd v = planes.graph_perp * w;
      for (int c = 0; c < n; ++c) out.at(node, c) = v(c);
    }
  });
  return out;
}

FieldSample velocity_from_motion_law(const GraphFlow& flow, const ForcingSpec& forcing,
                                     int time_index) {
  const SpaceTimeGrid& grid = flow.grid();
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  const FieldSample grad = gradient(flow, time_index);
  const FieldSample hess = hessian(flow, time_index);
  const double t = grid.time(time_index);
  const bool forced = !forcing.is_zero();
  const TangentFrame frame = TangentFrame::canonical(n, k);
  FieldSample out(grid.num_nodes(), n);
  parallel_for(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    Eigen::VectorXd point(n);
    for (std::size_t node = lo; node < hi; ++node) {
      const GradientMatrix p = gradient_at(grad, node, k, m);
      const HessianTensor q = hessian_at(hess, node, k, m);
      Eigen::VectorXd v = mean_curvature_of_graph(p, q);
      if (forced) {
        point.head(k) = grid.node_point(node);
        for (int a = 0; a < m; ++a) point(k + a) = flow.value(time_index, node, a);
        const Eigen::VectorXd u = forcing.evaluate(point, k, t);
        const ProjectionPair planes = graph_tangent_plane(frame, p, induced_metric(p));
        v += planes.graph_perp * u;
      }
      for (int c = 0; c < n; ++c) out.at(node, c) = v(c);
    }
  });
  return out;
}

FieldSample VelocityField::at(int time_index) const {
  if (provenance == VelocityProvenance::kFromGraphMotion)
    return velocity_from_graph(*flow, time_index);
  return velocity_from_motion_law(*flow, *forcing, time_index);
}

VelocityField graph_motion_velocity(const GraphFlow& flow) {
  return VelocityField{VelocityProvenance::kFromGraphMotion, &flow, nullptr};
}

VelocityField motion_law_velocity(const GraphFlow& flow, const ForcingSpec& forcing) {
  return VelocityField{VelocityProvenance::kFromMotionLaw, &flow, &forcing};
}

namespace {

struct PhiSeries {
  // All arrays are indexed [phi][slice].
  std::vector<std::vector<double>> lhs_val;  // integral phi d|V_t|
  std::vector<std::vector<double>> integrand;  // integral (-phi h + grad phi).v d|V_t|
  std::vector<std::vector<double>> mass;     // |V_t|(supp phi(.,t))
  std::vector<std::vector<double>> fwd;      // sum w (phi(pos, t_{i+1}) - phi(pos, t_i))
  std::vector<std::vector<double>> bwd;      // sum w (phi(pos, t_i) - phi(pos, t_{i-1}))
};

PhiSeries compute_series(const SpaceTimeMeasure& M, const VelocityField& velocity,
                         const std::vector<TestFunction>& phis) {
  const GraphFlow& flow = M.flow();
  const SpaceTimeGrid& grid = flow.grid();
  const int n = grid.ambient_dim();
  const int nt = grid.num_times();
  const std::size_t np = phis.size();

  PhiSeries s;
  s.lhs_val.assign(np, std::vector<double>(nt, 0.0));
  s.integrand.assign(np, std::vector<double>(nt, 0.0));
  s.mass.assign(np, std::vector<double>(nt, 0.0));
  s.fwd.assign(np, std::vector<double>(nt, 0.0));
  s.bwd.assign(np, std::vector<double>(nt, 0.0));

  parallel_for(nt, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t sti = lo; sti < hi; ++sti) {
      const int ti = static_cast<int>(sti);
      const double t = grid.time(ti);
      const DiscreteVarifold V = M.slice(ti);
      const FieldSample v = velocity.at(ti);
      const FieldSample h = mean_curvature_field(flow, ti);
      const double t_next = ti + 1 < nt ? grid.time(ti + 1) : t;
      const double t_prev = ti > 0 ? grid.time(ti - 1) : t;

      for (std::size_t p = 0; p < np; ++p) {
        const TestFunction& phi = phis[p];
        // A C^2 bump is zero with zero derivatives outside its time block;
        // skip slices where nothing in [t_prev, t_next] is active.
        if (!phi.time_active(t) && !phi.time_active(t_next) && !phi.time_active(t_prev)) continue;
        double acc_lhs = 0.0, acc_int = 0.0, acc_mass = 0.0, acc_fwd = 0.0, acc_bwd = 0.0;
        for (std::size_t node = 0; node < V.num_nodes(); ++node) {
          const Eigen::VectorXd pos = V.position(node);
          const double w = V.weight(node);
          const double pv = phi.value(pos, t);
          if (pv > 0.0) {
            acc_lhs += pv * w;
            acc_mass += w;
          }
          if (ti + 1 < nt) acc_fwd += w * (phi.value(pos, t_next) - pv);
          if (ti > 0) acc_bwd += w * (pv - phi.value(pos, t_prev));
          if (pv > 0.0) {
            const Eigen::VectorXd gradphi = phi.gradient(pos, t);
            double dot = 0.0;
            for (int c = 0; c < n; ++c)
              dot += (gradphi(c) - pv * h.at(node, c)) * v.at(node, c);
            acc_int += dot * w;
          }
        }
        s.lhs_val[p][sti] = acc_lhs;
        s.integrand[p][sti] = acc_int;
        s.mass[p][sti] = acc_mass;
        s.fwd[p][sti] = acc_fwd;
        s.bwd[p][sti] = acc_bwd;
      }
    }
  });
  return s;
}

double trapezoid(const std::vector<double>& vals, int i1, int i2, double dt) {
  double acc = 0.5 * (vals[i1] + vals[i2]);
  for (int i = i1 + 1; i < i2; ++i) acc += vals[i];
  return acc * dt;
}

}  // namespace

std::vector<BrakkeReport> brakke_residual_batch(const SpaceTimeMeasure& M,
                                                const VelocityField& velocity,
                                                const std::vector<TestFunction>& phis,
                                                const std::vector<BrakkeWindow>& windows,
                                                double c_report) {
  const SpaceTimeGrid& grid = M.flow().grid();
  std::vector<std::pair<int, int>> idx;
  idx.reserve(windows.size());
  for (const BrakkeWindow& w : windows) {
    const int i1 = grid.time_index(w.t1);
    const int i2 = grid.time_index(w.t2);
    if (i1 >= i2) throw std::invalid_argument("brakke window needs t1 < t2");
    idx.emplace_back(i1, i2);
  }

  const PhiSeries s = compute_series(M, velocity, phis);
  const double dt = grid.dt();
  const double disc = grid.spacing() * grid.spacing() + dt;

  std::vector<BrakkeReport> reports;
  reports.reserve(phis.size() * windows.size());
  for (std::size_t p = 0; p < phis.size(); ++p) {
    for (const auto& [i1, i2] : idx) {
      BrakkeReport r;
      r.phi_id = phis[p].id();
      r.t1 = grid.time(i1);
      r.t2 = grid.time(i2);
      r.lhs = s.lhs_val[p][i2] - s.lhs_val[p][i1];
      double dtphi_part = 0.0;
      for (int i = i1; i < i2; ++i)
        dtphi_part += 0.5 * (s.fwd[p][i] + s.bwd[p][i + 1]);
      r.rhs = trapezoid(s.integrand[p], i1, i2, dt) + dtphi_part;
      r.residual = r.rhs - r.lhs;
      const double mu_supp = trapezoid(s.mass[p], i1, i2, dt);
      r.scale = std::max({std::abs(r.lhs), std::abs(r.rhs), mu_supp});
      r.tol = c_report * disc * r.scale;
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

BrakkeReport brakke_residual(const SpaceTimeMeasure& M, const VelocityField& velocity,
                             const TestFunction& phi, double t1, double t2, double c_report) {
  return brakke_residual_batch(M, velocity, {phi}, {{t1, t2}}, c_report).front();
}

FieldSample identity_residual(const GraphFlow& flow, const FieldSample& v_slice, int time_index) {
  const SpaceTimeGrid& grid = flow.grid();
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  if (v_slice.num_nodes != grid.num_nodes() || v_slice.ncomp != n)
    throw std::invalid_argument("velocity slice shape mismatch");
  const FieldSample grad = gradient(flow, time_index);
  const FieldSample ft = time_derivative(flow, time_index);
  FieldSample out(grid.num_nodes(), 1);
  parallel_for(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      // d_t f^a - (T_perp v)^a + (grad f . T v)^a componentwise.
      double sq = 0.0;
      for (int a = 0; a < m; ++a) {
        double res = ft.at(node, a) - v_slice.at(node, k + a);
        for (int j = 0; j < k; ++j) res += grad.at(node, j * m + a) * v_slice.at(node, j);
        sq += res * res;
      }
      out.at(node, 0) = std::sqrt(sq);
    }
  });
  return out;
}

FieldSample motion_law_residual(const GraphFlow& flow, const ForcingSpec& forcing,
                                int time_index) {
  const SpaceTimeGrid& grid = flow.grid();
  const int n = grid.ambient_dim();
  const FieldSample vg = velocity_from_graph(flow, time_index);
  const FieldSample vm = velocity_from_motion_law(flow, forcing, time_index);
  FieldSample out(grid.num_nodes(), 1);
  parallel_for(grid.num_nodes(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t node = lo; node < hi; ++node) {
      double sq = 0.0;
      for (int c = 0; c < n; ++c) {
        const double d = vg.at(node, c) - vm.at(node, c);
        sq += d * d;
      }
      out.at(node, 0) = std::sqrt(sq);
    }
  });
  return out;
}

ResidualSummary summarize_interior(const SpaceTimeGrid& grid, const FieldSample& scalar) {
  if (scalar.num_nodes != grid.num_nodes() || scalar.ncomp != 1)
    throw std::invalid_argument("summarize_interior expects a scalar node field");
  ResidualSummary s;
  const double hk = std::pow(grid.spacing(), grid.dim());
  double acc = 0.0;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    if (!grid.is_interior(node)) continue;
    const double v = scalar.at(node, 0);
    s.max_interior = std::max(s.max_interior, std::abs(v));
    acc += v * v * hk;
  }
  s.l2_interior = std::sqrt(acc);
  return s;
}

}  // namespace graflow
