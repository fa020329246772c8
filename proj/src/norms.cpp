#include "graflow/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graflow/geometry.hpp"
#include "graflow/stencils.hpp"

namespace graflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> window_slices(const SpaceTimeGrid& grid, const TimeWindow& w) {
  std::vector<int> out;
  for (int ti = 0; ti < grid.num_times(); ++ti) {
    const double t = grid.time(ti);
    if (t >= w.t_lo - 1e-12 && t <= w.t_hi + 1e-12) out.push_back(ti);
  }
  return out;
}

// Pointwise magnitude of the selected field on one slice. Hessian samples
// carry the packed upper triangle, so off-diagonal pairs count twice in the
// Frobenius norm.
FieldSample magnitude_sample(const GraphFlow& flow, const ForcingSpec* forcing,
                             FieldSelector sel, int ti) {
  const SpaceTimeGrid& grid = flow.grid();
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  FieldSample out(grid.num_nodes(), 1);
  switch (sel) {
    case FieldSelector::kF: {
      for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
        double sq = 0.0;
        for (int a = 0; a < m; ++a) sq += flow.value(ti, node, a) * flow.value(ti, node, a);
        out.at(node, 0) = std::sqrt(sq);
      }
      break;
    }
    case FieldSelector::kGradF: {
      const FieldSample g = gradient(flow, ti);
      for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
        double sq = 0.0;
        for (int c = 0; c < g.ncomp; ++c) sq += g.at(node, c) * g.at(node, c);
        out.at(node, 0) = std::sqrt(sq);
      }
      break;
    }
    case FieldSelector::kHessF: {
      const FieldSample hs = hessian(flow, ti);
      for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
        double sq = 0.0;
        for (int i = 0; i < k; ++i)
          for (int j = i; j < k; ++j) {
            const double mult = (i == j) ? 1.0 : 2.0;
            const int pair = hessian_pair_index(i, j, k);
            for (int a = 0; a < m; ++a) {
              const double v = hs.at(node, pair * m + a);
              sq += mult * v * v;
            }
          }
        out.at(node, 0) = std::sqrt(sq);
      }
      break;
    }
    case FieldSelector::kDtF: {
      const FieldSample d = time_derivative(flow, ti);
      for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
        double sq = 0.0;
        for (int a = 0; a < m; ++a) sq += d.at(node, a) * d.at(node, a);
        out.at(node, 0) = std::sqrt(sq);
      }
      break;
    }
    case FieldSelector::kForcingAlongGraph: {
      if (!forcing) throw std::invalid_argument("forcing norm requested without a forcing field");
      const double t = grid.time(ti);
      Eigen::VectorXd point(n);
      for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
        point.head(k) = grid.node_point(node);
        for (int a = 0; a < m; ++a) point(k + a) = flow.value(ti, node, a);
        out.at(node, 0) = forcing->evaluate(point, k, t).norm();
      }
      break;
    }
  }
  return out;
}

FieldSample sqrt_g_sample(const GraphFlow& flow, int ti) {
  const SpaceTimeGrid& grid = flow.grid();
  const int k = grid.dim(), m = grid.codim();
  const FieldSample grad = gradient(flow, ti);
  FieldSample out(grid.num_nodes(), 1);
  for (std::size_t node = 0; node < grid.num_nodes(); ++node)
    out.at(node, 0) = induced_metric(gradient_at(grad, node, k, m)).sqrt_g;
  return out;
}

double inner_norm(const SpaceTimeGrid& grid, const FieldSample& mag, const FieldSample& weight,
                  const RegionMask& mask, double p, bool* any) {
  *any = false;
  if (p == kInf) {
    double best = 0.0;
    for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
      if (!mask.contains(grid.node_point(node))) continue;
      *any = true;
      best = std::max(best, mag.at(node, 0));
    }
    return best;
  }
  double acc = 0.0;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    if (!mask.contains(grid.node_point(node))) continue;
    *any = true;
    const double w = weight.data.empty() ? 1.0 : weight.at(node, 0);
    acc += std::pow(mag.at(node, 0), p) * w * grid.quad_weight(node);
  }
  return std::pow(acc, 1.0 / p);
}

}  // namespace

double lpq_norm(const GraphFlow& flow, const ForcingSpec* forcing, const NormRequest& req) {
  if (req.p < 1.0 || req.q < 1.0) throw std::invalid_argument("lpq_norm needs p, q >= 1");
  const SpaceTimeGrid& grid = flow.grid();
  const std::vector<int> slices = window_slices(grid, req.window);
  if (slices.empty()) throw std::invalid_argument("lpq_norm: empty time window");
  if (req.q != kInf && slices.size() < 2)
    throw std::invalid_argument("lpq_norm: finite q needs at least two slices in the window");

  std::vector<double> inner(slices.size());
  bool any = false;
  for (std::size_t si = 0; si < slices.size(); ++si) {
    const FieldSample mag = magnitude_sample(flow, forcing, req.field, slices[si]);
    FieldSample w;
    if (req.measure == NormMeasure::kWeight) w = sqrt_g_sample(flow, slices[si]);
    bool slice_any = false;
    inner[si] = inner_norm(grid, mag, w, req.mask, req.p, &slice_any);
    any = any || slice_any;
  }
  if (!any) throw std::invalid_argument("lpq_norm: empty spatial region");

  if (req.q == kInf) return *std::max_element(inner.begin(), inner.end());
  double acc = 0.0;
  for (std::size_t si = 0; si < slices.size(); ++si) {
    const double wt = (si == 0 || si + 1 == slices.size()) ? 0.5 : 1.0;
    acc += std::pow(inner[si], req.q) * wt * grid.dt();
  }
  return std::pow(acc, 1.0 / req.q);
}

namespace {

// Deterministic stream for subsampled pair scans (splitmix64).
struct SplitMix {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

// Sampled field over (masked node, window slice) pairs; values per sample
// are C components, compared with the Euclidean norm. Hessian components
// come in pre-scaled by sqrt(2) on off-diagonal pairs so the Euclidean
// difference is the full-tensor Frobenius difference. Fields sampled along
// the moving graph carry per-slice ambient positions in pos_t.
struct HolderSamples {
  std::vector<std::size_t> nodes;         // masked node ids
  std::vector<int> slices;                // window slice indices
  std::vector<Eigen::VectorXd> pos;       // base coords per masked node
  std::vector<std::vector<Eigen::VectorXd>> pos_t;  // optional [slice][node]
  std::vector<double> times;              // per slice
  std::vector<std::vector<double>> vals;  // [slice][node_sel * C + c]
  int comps = 0;

  std::size_t count() const { return nodes.size() * slices.size(); }

  const Eigen::VectorXd& position(std::size_t s, std::size_t j) const {
    return pos_t.empty() ? pos[j] : pos_t[s][j];
  }

  double diff(std::size_t s1, std::size_t j1, std::size_t s2, std::size_t j2) const {
    double sq = 0.0;
    const double* a = vals[s1].data() + j1 * comps;
    const double* b = vals[s2].data() + j2 * comps;
    for (int c = 0; c < comps; ++c) sq += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(sq);
  }
};

double parabolic_dist_pow(const HolderSamples& hs, std::size_t s1, std::size_t j1,
                          std::size_t s2, std::size_t j2, double alpha) {
  const double dx = (hs.position(s1, j1) - hs.position(s2, j2)).norm();
  const double dt = std::abs(hs.times[s1] - hs.times[s2]);
  return std::max(std::pow(dx, alpha), std::pow(dt, alpha / 2.0));
}

// sup over pairs of |delta vals| / denominator. Exhaustive when the sample
// count is small, otherwise three deterministic strata of pair_cap pairs.
double holder_sup(const HolderSamples& hs, double alpha, std::size_t pair_cap,
                  bool time_term_only, double time_exponent) {
  const std::size_t nn = hs.nodes.size();
  const std::size_t ns = hs.slices.size();
  double sup = 0.0;

  auto consider = [&](std::size_t s1, std::size_t j1, std::size_t s2, std::size_t j2) {
    if (s1 == s2 && j1 == j2) return;
    if (time_term_only) {
      if (j1 != j2 || s1 == s2) return;
      const double denom = std::pow(std::abs(hs.times[s1] - hs.times[s2]), time_exponent);
      if (denom > 0.0) sup = std::max(sup, hs.diff(s1, j1, s2, j2) / denom);
      return;
    }
    const double denom = parabolic_dist_pow(hs, s1, j1, s2, j2, alpha);
    if (denom > 0.0) sup = std::max(sup, hs.diff(s1, j1, s2, j2) / denom);
  };

  const std::size_t total = hs.count();
  if (total <= 2000) {
    for (std::size_t s1 = 0; s1 < ns; ++s1)
      for (std::size_t j1 = 0; j1 < nn; ++j1)
        for (std::size_t s2 = s1; s2 < ns; ++s2)
          for (std::size_t j2 = (s2 == s1 ? j1 + 1 : 0); j2 < nn; ++j2)
            consider(s1, j1, s2, j2);
    return sup;
  }

  SplitMix rng{0x5eed5eed5eed5eedull};
  if (!time_term_only) {
    // spatial stratum: same slice
    for (std::size_t i = 0; i < pair_cap; ++i) {
      const std::size_t s = rng.next() % ns;
      consider(s, rng.next() % nn, s, rng.next() % nn);
    }
    // mixed stratum
    for (std::size_t i = 0; i < pair_cap; ++i)
      consider(rng.next() % ns, rng.next() % nn, rng.next() % ns, rng.next() % nn);
  }
  // temporal stratum: same node
  for (std::size_t i = 0; i < pair_cap; ++i) {
    const std::size_t j = rng.next() % nn;
    consider(rng.next() % ns, j, rng.next() % ns, j);
  }
  return sup;
}

HolderSamples collect_samples(const GraphFlow& flow, const RegionMask& mask,
                              const TimeWindow& window, FieldSelector sel) {
  const SpaceTimeGrid& grid = flow.grid();
  const int k = grid.dim(), m = grid.codim();
  HolderSamples hs;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    const Eigen::VectorXd x = grid.node_point(node);
    if (!mask.contains(x)) continue;
    hs.nodes.push_back(node);
    hs.pos.push_back(x);
  }
  if (hs.nodes.empty()) throw std::invalid_argument("holder seminorm: empty spatial region");
  hs.slices = window_slices(grid, window);
  if (hs.slices.empty()) throw std::invalid_argument("holder seminorm: empty time window");
  for (int ti : hs.slices) hs.times.push_back(grid.time(ti));

  for (int ti : hs.slices) {
    std::vector<double> row;
    switch (sel) {
      case FieldSelector::kF: {
        hs.comps = m;
        row.resize(hs.nodes.size() * m);
        for (std::size_t j = 0; j < hs.nodes.size(); ++j)
          for (int a = 0; a < m; ++a) row[j * m + a] = flow.value(ti, hs.nodes[j], a);
        break;
      }
      case FieldSelector::kGradF: {
        const FieldSample g = gradient(flow, ti);
        hs.comps = k * m;
        row.resize(hs.nodes.size() * hs.comps);
        for (std::size_t j = 0; j < hs.nodes.size(); ++j)
          for (int c = 0; c < hs.comps; ++c) row[j * hs.comps + c] = g.at(hs.nodes[j], c);
        break;
      }
      case FieldSelector::kDtF: {
        const FieldSample d = time_derivative(flow, ti);
        hs.comps = m;
        row.resize(hs.nodes.size() * m);
        for (std::size_t j = 0; j < hs.nodes.size(); ++j)
          for (int a = 0; a < m; ++a) row[j * m + a] = d.at(hs.nodes[j], a);
        break;
      }
      case FieldSelector::kHessF: {
        const FieldSample q = hessian(flow, ti);
        hs.comps = q.ncomp;
        row.resize(hs.nodes.size() * hs.comps);
        const double rt2 = std::sqrt(2.0);
        for (std::size_t j = 0; j < hs.nodes.size(); ++j)
          for (int i = 0; i < k; ++i)
            for (int jj = i; jj < k; ++jj) {
              const int pair = hessian_pair_index(i, jj, k);
              const double scale = (i == jj) ? 1.0 : rt2;
              for (int a = 0; a < m; ++a)
                row[j * hs.comps + pair * m + a] = scale * q.at(hs.nodes[j], pair * m + a);
            }
        break;
      }
      case FieldSelector::kForcingAlongGraph:
        throw std::invalid_argument("holder seminorm: unsupported field selector");
    }
    hs.vals.push_back(std::move(row));
  }
  return hs;
}

// u sampled along the graph, with ambient positions x + f(x, t).
HolderSamples collect_forcing_samples(const GraphFlow& flow, const ForcingSpec& forcing,
                                      const RegionMask& mask, const TimeWindow& window) {
  const SpaceTimeGrid& grid = flow.grid();
  const int k = grid.dim(), m = grid.codim(), n = k + m;
  HolderSamples hs;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    const Eigen::VectorXd x = grid.node_point(node);
    if (!mask.contains(x)) continue;
    hs.nodes.push_back(node);
    hs.pos.push_back(x);
  }
  if (hs.nodes.empty()) throw std::invalid_argument("holder seminorm: empty spatial region");
  hs.slices = window_slices(grid, window);
  if (hs.slices.empty()) throw std::invalid_argument("holder seminorm: empty time window");
  hs.comps = n;
  for (int ti : hs.slices) {
    hs.times.push_back(grid.time(ti));
    std::vector<double> row(hs.nodes.size() * n);
    std::vector<Eigen::VectorXd> positions(hs.nodes.size());
    for (std::size_t j = 0; j < hs.nodes.size(); ++j) {
      Eigen::VectorXd point(n);
      point.head(k) = hs.pos[j];
      for (int a = 0; a < m; ++a) point(k + a) = flow.value(ti, hs.nodes[j], a);
      positions[j] = point;
      const Eigen::VectorXd u = forcing.evaluate(point, k, grid.time(ti));
      for (int c = 0; c < n; ++c) row[j * n + c] = u(c);
    }
    hs.pos_t.push_back(std::move(positions));
    hs.vals.push_back(std::move(row));
  }
  return hs;
}

}  // namespace

double parabolic_holder(const GraphFlow& flow, double alpha, int order, const RegionMask& mask,
                        const TimeWindow& window, std::size_t pair_cap) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw std::invalid_argument("holder seminorm needs alpha in (0,1)");
  switch (order) {
    case 0: {
      const HolderSamples hs = collect_samples(flow, mask, window, FieldSelector::kF);
      return holder_sup(hs, alpha, pair_cap, false, 0.0);
    }
    case 1: {
      const HolderSamples grad = collect_samples(flow, mask, window, FieldSelector::kGradF);
      const HolderSamples f = collect_samples(flow, mask, window, FieldSelector::kF);
      return holder_sup(grad, alpha, pair_cap, false, 0.0) +
             holder_sup(f, alpha, pair_cap, true, (1.0 + alpha) / 2.0);
    }
    case 2: {
      const HolderSamples dtf = collect_samples(flow, mask, window, FieldSelector::kDtF);
      const HolderSamples hess = collect_samples(flow, mask, window, FieldSelector::kHessF);
      return holder_sup(dtf, alpha, pair_cap, false, 0.0) +
             holder_sup(hess, alpha, pair_cap, false, 0.0);
    }
    default:
      throw std::invalid_argument("holder seminorm order must be 0, 1, or 2");
  }
}

EstimateReport estimate_report(const GraphFlow& flow, const ForcingSpec& forcing, double p,
                               double q, double radius, const Eigen::VectorXd& center) {
  const SpaceTimeGrid& grid = flow.grid();
  if (!(radius > 0.0)) throw std::invalid_argument("estimate_report needs R > 0");
  for (int d = 0; d < grid.dim(); ++d) {
    if (center(d) - radius < grid.axis(d).lo - 1e-12 ||
        center(d) + radius > grid.axis(d).hi + 1e-12)
      throw std::invalid_argument("estimate_report: grid does not cover the outer ball");
  }
  if (grid.t_end() - radius * radius < grid.t_start() - 1e-12)
    throw std::invalid_argument("estimate_report: grid does not cover the outer time window");

  const double r_half = radius / 2.0;
  const TimeWindow inner_w{grid.t_end() - r_half * r_half, grid.t_end()};
  const TimeWindow outer_w{grid.t_end() - radius * radius, grid.t_end()};
  const RegionMask inner_mask = RegionMask::ball(center, r_half);
  const RegionMask outer_mask = RegionMask::ball(center, radius);

  NormRequest req;
  req.p = p;
  req.q = q;

  EstimateReport rep;
  rep.p = p;
  rep.q = q;
  rep.radius = radius;

  req.mask = inner_mask;
  req.window = inner_w;
  req.field = FieldSelector::kDtF;
  rep.lhs = lpq_norm(flow, nullptr, req);
  req.field = FieldSelector::kHessF;
  rep.lhs += lpq_norm(flow, nullptr, req);

  req.mask = outer_mask;
  req.window = outer_w;
  req.field = FieldSelector::kF;
  rep.rhs_f = lpq_norm(flow, nullptr, req) / (radius * radius);
  req.field = FieldSelector::kForcingAlongGraph;
  req.measure = NormMeasure::kWeight;
  rep.rhs_u = forcing.is_zero() ? 0.0 : lpq_norm(flow, &forcing, req);

  const double rhs = rep.rhs_f + rep.rhs_u;
  if (rhs <= 0.0) {
    rep.degenerate = true;
    rep.ratio = 0.0;
  } else {
    rep.ratio = rep.lhs / rhs;
  }
  return rep;
}

EstimateReport holder_estimate_report(const GraphFlow& flow, const ForcingSpec& forcing,
                                      double alpha, double radius,
                                      const Eigen::VectorXd& center) {
  const SpaceTimeGrid& grid = flow.grid();
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw std::invalid_argument("holder estimate needs alpha in (0,1)");
  for (int d = 0; d < grid.dim(); ++d) {
    if (center(d) - radius < grid.axis(d).lo - 1e-12 ||
        center(d) + radius > grid.axis(d).hi + 1e-12)
      throw std::invalid_argument("holder estimate: grid does not cover the outer ball");
  }
  if (grid.t_end() - radius * radius < grid.t_start() - 1e-12)
    throw std::invalid_argument("holder estimate: grid does not cover the outer time window");

  const double r_half = radius / 2.0;
  const TimeWindow inner_w{grid.t_end() - r_half * r_half, grid.t_end()};
  const TimeWindow outer_w{grid.t_end() - radius * radius, grid.t_end()};
  const RegionMask inner_mask = RegionMask::ball(center, r_half);
  const RegionMask outer_mask = RegionMask::ball(center, radius);
  const double r_alpha = std::pow(radius, alpha);
  constexpr double kSup = std::numeric_limits<double>::infinity();

  EstimateReport rep;
  rep.p = rep.q = kSup;
  rep.alpha = alpha;
  rep.radius = radius;

  NormRequest req;
  req.p = req.q = kSup;
  req.mask = inner_mask;
  req.window = inner_w;
  req.field = FieldSelector::kDtF;
  rep.lhs = lpq_norm(flow, nullptr, req);
  req.field = FieldSelector::kHessF;
  rep.lhs += lpq_norm(flow, nullptr, req);
  rep.lhs += r_alpha * parabolic_holder(flow, alpha, 2, inner_mask, inner_w);

  req.mask = outer_mask;
  req.window = outer_w;
  req.field = FieldSelector::kF;
  rep.rhs_f = lpq_norm(flow, nullptr, req) / (radius * radius);
  rep.rhs_u = 0.0;
  if (!forcing.is_zero()) {
    req.field = FieldSelector::kForcingAlongGraph;
    rep.rhs_u = lpq_norm(flow, &forcing, req);
    const HolderSamples us = collect_forcing_samples(flow, forcing, outer_mask, outer_w);
    rep.rhs_u += r_alpha * holder_sup(us, alpha, 40000, false, 0.0);
  }

  const double rhs = rep.rhs_f + rep.rhs_u;
  if (rhs <= 0.0) {
    rep.degenerate = true;
    rep.ratio = 0.0;
  } else {
    rep.ratio = rep.lhs / rhs;
  }
  return rep;
}

}  // namespace graflow
