#pragma once

#include <vector>

#include <Eigen/Dense>

#include "graflow/expression.hpp"
#include "graflow/grid.hpp"

namespace graflow {

/// Gridded ambient vector field: multilinear interpolation in space, linear
/// in time. Queries outside the box (or the time range) are rejected.
struct GriddedForcing {
  int ambient_dim = 0;
  std::vector<AxisRange> box;   // ambient axes
  std::vector<int> counts;      // nodes per axis
  std::vector<double> times;    // strictly increasing
  std::vector<double> values;   // [time][node][component], row-major nodes

  Eigen::VectorXd evaluate(const Eigen::VectorXd& point, double t) const;
};

/// Ambient forcing field u(x, t): zero, a closed-form expression per
/// component, or gridded samples. Evaluation is deterministic.
class ForcingSpec {
 public:
  static ForcingSpec zero(int ambient_dim);
  /// comps.size() == ambient_dim; expressions over x1..xk, y1..y{codim}, t.
  static ForcingSpec analytic(std::vector<Expression> comps, int ambient_dim);
  static ForcingSpec gridded(GriddedForcing data);

  int ambient_dim() const { return n_; }
  bool is_zero() const { return kind_ == Kind::kZero; }

  /// u at an ambient point. The first k entries of `point` are base-plane
  /// coordinates, the rest normal coordinates.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& point, int k, double t) const;

 private:
  enum class Kind { kZero, kAnalytic, kGridded };
  Kind kind_ = Kind::kZero;
  int n_ = 0;
  std::vector<Expression> comps_;
  GriddedForcing grid_;
};

}  // namespace graflow
