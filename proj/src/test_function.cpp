#include "graflow/test_function.hpp"

#include <sstream>

namespace graflow {

SpatialBump::SpatialBump(Eigen::VectorXd center, double r_tan, double r_norm, int k)
    : center_(std::move(center)), r_tan_(r_tan), r_norm_(r_norm), k_(k) {
  if (k_ < 1 || k_ >= center_.size())
    throw std::invalid_argument("bump: need 1 <= k < ambient dimension");
  if (!(r_tan_ > 0.0) || !(r_norm_ > 0.0))
    throw std::invalid_argument("bump radii must be positive");
}

double SpatialBump::value(const Eigen::VectorXd& pos) const {
  const double s_tan = (pos.head(k_) - center_.head(k_)).squaredNorm() / (r_tan_ * r_tan_);
  if (s_tan >= 1.0) return 0.0;
  const int m = ambient_dim() - k_;
  const double s_norm = (pos.tail(m) - center_.tail(m)).squaredNorm() / (r_norm_ * r_norm_);
  if (s_norm >= 1.0) return 0.0;
  return BumpProfile::b(s_tan) * BumpProfile::b(s_norm);
}

Eigen::VectorXd SpatialBump::gradient(const Eigen::VectorXd& pos) const {
  const int n = ambient_dim();
  const int m = n - k_;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd d_tan = pos.head(k_) - center_.head(k_);
  const Eigen::VectorXd d_norm = pos.tail(m) - center_.tail(m);
  const double s_tan = d_tan.squaredNorm() / (r_tan_ * r_tan_);
  const double s_norm = d_norm.squaredNorm() / (r_norm_ * r_norm_);
  if (s_tan >= 1.0 || s_norm >= 1.0) return grad;
  const double b_tan = BumpProfile::b(s_tan);
  const double b_norm = BumpProfile::b(s_norm);
  grad.head(k_) = BumpProfile::db(s_tan) * (2.0 / (r_tan_ * r_tan_)) * d_tan * b_norm;
  grad.tail(m) = BumpProfile::db(s_norm) * (2.0 / (r_norm_ * r_norm_)) * d_norm * b_tan;
  return grad;
}

void SpatialBump::require_support_inside(const SpaceTimeGrid& grid, double margin) const {
  if (grid.dim() != k_) throw std::invalid_argument("bump tangent dimension mismatch");
  for (int d = 0; d < k_; ++d) {
    const double lo = center_(d) - r_tan_;
    const double hi = center_(d) + r_tan_;
    if (!(lo > grid.axis(d).lo + margin) || !(hi < grid.axis(d).hi - margin)) {
      std::ostringstream os;
      os << "test field support [" << lo << ", " << hi << "] on axis " << d
         << " is not strictly inside the grid box";
      throw std::invalid_argument(os.str());
    }
  }
}

TestFunction::TestFunction(std::string id, SpatialBump bump, double t_center, double tau,
                           const SpaceTimeGrid& grid)
    : id_(std::move(id)), bump_(std::move(bump)), t_center_(t_center), tau_(tau) {
  if (!(tau_ > 0.0)) throw std::invalid_argument("test function needs tau > 0");
  bump_.require_support_inside(grid, 0.0);
  if (!(t_center_ - tau_ > grid.t_start()) || !(t_center_ + tau_ < grid.t_end()))
    throw std::invalid_argument("test function time support is not strictly inside t_range");
}

double TestFunction::time_block(double t) const {
  const double s = (t - t_center_) * (t - t_center_) / (tau_ * tau_);
  return BumpProfile::b(s);
}

double TestFunction::time_block_dt(double t) const {
  const double s = (t - t_center_) * (t - t_center_) / (tau_ * tau_);
  return BumpProfile::db(s) * 2.0 * (t - t_center_) / (tau_ * tau_);
}

double TestFunction::value(const Eigen::VectorXd& pos, double t) const {
  const double tb = time_block(t);
  if (tb == 0.0) return 0.0;
  return bump_.value(pos) * tb;
}

Eigen::VectorXd TestFunction::gradient(const Eigen::VectorXd& pos, double t) const {
  const double tb = time_block(t);
  if (tb == 0.0) return Eigen::VectorXd::Zero(bump_.ambient_dim());
  return bump_.gradient(pos) * tb;
}

double TestFunction::dt(const Eigen::VectorXd& pos, double t) const {
  const double dtb = time_block_dt(t);
  if (dtb == 0.0) return 0.0;
  return bump_.value(pos) * dtb;
}

VectorTestField::VectorTestField(SpatialBump b, Eigen::VectorXd dir)
    : bump(std::move(b)), direction(std::move(dir)) {
  if (direction.size() != bump.ambient_dim())
    throw std::invalid_argument("test field direction has wrong dimension");
}

}  // namespace graflow
