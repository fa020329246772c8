#include "graflow/forcing.hpp"

#include <algorithm>
#include <cmath>

namespace graflow {

Eigen::VectorXd GriddedForcing::evaluate(const Eigen::VectorXd& point, double t) const {
  const int n = ambient_dim;
  if (point.size() != n) throw std::invalid_argument("gridded forcing: wrong point dimension");

  std::vector<int> base(n);
  std::vector<double> frac(n);
  std::vector<std::size_t> strides(n, 1);
  for (int d = n - 2; d >= 0; --d) strides[d] = strides[d + 1] * counts[d + 1];
  for (int d = 0; d < n; ++d) {
    const double span = box[d].hi - box[d].lo;
    const double u = (point(d) - box[d].lo) / span * (counts[d] - 1);
    if (u < -1e-9 || u > counts[d] - 1 + 1e-9)
      throw std::domain_error("gridded forcing queried outside its box");
    const double clamped = std::clamp(u, 0.0, static_cast<double>(counts[d] - 1));
    base[d] = std::min(static_cast<int>(clamped), counts[d] - 2);
    frac[d] = clamped - base[d];
  }
  if (t < times.front() - 1e-9 || t > times.back() + 1e-9)
    throw std::domain_error("gridded forcing queried outside its time range");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  int ti = static_cast<int>(it - times.begin()) - 1;
  ti = std::clamp(ti, 0, static_cast<int>(times.size()) - 2);
  const double tf = std::clamp((t - times[ti]) / (times[ti + 1] - times[ti]), 0.0, 1.0);

  std::size_t nodes = 1;
  for (int c : counts) nodes *= static_cast<std::size_t>(c);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const int corners = 1 << n;
  for (int corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    std::size_t idx = 0;
    for (int d = 0; d < n; ++d) {
      const int bit = (corner >> d) & 1;
      w *= bit ? frac[d] : 1.0 - frac[d];
      idx += static_cast<std::size_t>(base[d] + bit) * strides[d];
    }
    if (w == 0.0) continue;
    for (int c = 0; c < n; ++c) {
      const double v0 = values[(static_cast<std::size_t>(ti) * nodes + idx) * n + c];
      const double v1 = values[(static_cast<std::size_t>(ti + 1) * nodes + idx) * n + c];
      out(c) += w * ((1.0 - tf) * v0 + tf * v1);
    }
  }
  return out;
}

ForcingSpec ForcingSpec::zero(int ambient_dim) {
  ForcingSpec f;
  f.kind_ = Kind::kZero;
  f.n_ = ambient_dim;
  return f;
}

ForcingSpec ForcingSpec::analytic(std::vector<Expression> comps, int ambient_dim) {
  if (static_cast<int>(comps.size()) != ambient_dim)
    throw std::invalid_argument("forcing needs one expression per ambient component");
  ForcingSpec f;
  f.kind_ = Kind::kAnalytic;
  f.n_ = ambient_dim;
  f.comps_ = std::move(comps);
  return f;
}

ForcingSpec ForcingSpec::gridded(GriddedForcing data) {
  if (data.ambient_dim < 2 || static_cast<int>(data.box.size()) != data.ambient_dim ||
      static_cast<int>(data.counts.size()) != data.ambient_dim || data.times.size() < 2)
    throw std::invalid_argument("malformed gridded forcing");
  std::size_t nodes = 1;
  for (int c : data.counts) {
    if (c < 2) throw std::invalid_argument("gridded forcing needs >= 2 samples per axis");
    nodes *= static_cast<std::size_t>(c);
  }
  if (data.values.size() != data.times.size() * nodes * static_cast<std::size_t>(data.ambient_dim))
    throw std::invalid_argument("gridded forcing value count mismatch");
  ForcingSpec f;
  f.kind_ = Kind::kGridded;
  f.n_ = data.ambient_dim;
  f.grid_ = std::move(data);
  return f;
}

Eigen::VectorXd ForcingSpec::evaluate(const Eigen::VectorXd& point, int k, double t) const {
  switch (kind_) {
    case Kind::kZero: return Eigen::VectorXd::Zero(n_);
    case Kind::kAnalytic: {
      Eigen::VectorXd u(n_);
      const double* x = point.data();
      const double* y = point.data() + k;
      for (int c = 0; c < n_; ++c) u(c) = comps_[c].evaluate(x, y, t);
      return u;
    }
    case Kind::kGridded: return grid_.evaluate(point, t);
  }
  return Eigen::VectorXd::Zero(n_);
}

}  // namespace graflow
