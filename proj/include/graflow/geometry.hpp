#pragma once

#include <Eigen/Dense>

#include "graflow/common.hpp"

namespace graflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Spatial gradient of a graph function at one point.
/// entries(i, a) = derivative of graph component a along domain axis i,
/// i = 0..k-1, a = 0..codim-1.
struct GradientMatrix {
  Matrix entries;

  GradientMatrix() = default;
  explicit GradientMatrix(Matrix m) : entries(std::move(m)) {}
  static GradientMatrix zero(int k, int codim) { return GradientMatrix(Matrix::Zero(k, codim)); }

  int dim() const { return static_cast<int>(entries.rows()); }
  int codim() const { return static_cast<int>(entries.cols()); }
  double frobenius_sq() const { return entries.squaredNorm(); }
  bool finite() const { return entries.allFinite(); }
};

/// Spatial Hessian of a graph function at one point, symmetric in the two
/// domain indices. Only the upper triangle (i <= j) is stored, so the
/// symmetry Q_ij^a == Q_ji^a holds exactly by construction.
class HessianTensor {
 public:
  HessianTensor() = default;
  HessianTensor(int k, int codim)
      : k_(k), codim_(codim), packed_(static_cast<std::size_t>(k * (k + 1) / 2) * codim, 0.0) {}
  static HessianTensor zero(int k, int codim) { return HessianTensor(k, codim); }

  int dim() const { return k_; }
  int codim() const { return codim_; }

  double operator()(int i, int j, int a) const { return packed_[slot(i, j, a)]; }
  void set(int i, int j, int a, double v) { packed_[slot(i, j, a)] = v; }

  bool finite() const {
    for (double v : packed_) {
      if (!is_finite(v)) return false;
    }
    return true;
  }

 private:
  std::size_t slot(int i, int j, int a) const {
    if (i > j) std::swap(i, j);
    // packed upper triangle, row major: (i,j) -> i*k - i(i-1)/2 + (j-i)
    const int pair = i * k_ - i * (i - 1) / 2 + (j - i);
    return static_cast<std::size_t>(pair) * codim_ + a;
  }

  int k_ = 0;
  int codim_ = 0;
  std::vector<double> packed_;
};

/// Induced metric data of a graph with gradient P:
///   g = I + P P^T (domain side),  g_inv = g^{-1},  sqrt_g = sqrt(det g).
/// eig_min/eig_max are the extreme eigenvalues of g_inv; they always satisfy
/// eig_max <= 1 and eig_min >= 1/(1 + |P|_F^2).
struct MetricPack {
  Matrix g;
  Matrix g_inv;
  double sqrt_g = 1.0;
  double eig_min = 1.0;
  double eig_max = 1.0;
};

/// Orthonormal ambient frame adapted to a base k-plane: the first k columns
/// of `rotation` span the base plane T, the remaining n-k columns span its
/// orthogonal complement. All graph quantities are computed in the canonical
/// frame (T = span(e_1..e_k)) and conjugated by `rotation`.
struct TangentFrame {
  Matrix rotation;  // n x n orthogonal
  int n = 0;
  int k = 0;

  static TangentFrame canonical(int n, int k);
  /// Builds a frame from an orthonormal n x k basis of T, completing it with
  /// a deterministic Gram-Schmidt sweep over the coordinate directions.
  /// Throws std::invalid_argument on a rank-deficient or non-orthonormal basis.
  static TangentFrame from_basis(const Matrix& basis);

  Matrix tangent_basis() const { return rotation.leftCols(k); }
  Matrix normal_basis() const { return rotation.rightCols(n - k); }
};

/// Projections associated with a graph point: `base` is the projection onto
/// the base plane T, `graph` the projection S onto the graph tangent plane,
/// and the *_perp members their complements.
struct ProjectionPair {
  Matrix base;        // T
  Matrix base_perp;   // I - T
  Matrix graph;       // S
  Matrix graph_perp;  // I - S
};

struct LegendreHadamardResult {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Metric pack of Eq-style g = I + P P^T. The inverse is computed from the
/// closed Woodbury form in extended precision, the determinant from the
/// Gram determinant on the smaller side, and the spectrum from the singular
/// values of P.
MetricPack induced_metric(const GradientMatrix& P);

/// Projection onto the graph tangent plane spanned by the frame's tangent
/// basis vectors plus their images under P.
ProjectionPair graph_tangent_plane(const TangentFrame& frame, const GradientMatrix& P);
ProjectionPair graph_tangent_plane(const GradientMatrix& P);  // canonical frame
/// Variant reusing an already computed metric pack (hot loops).
ProjectionPair graph_tangent_plane(const TangentFrame& frame, const GradientMatrix& P,
                                   const MetricPack& mp);

/// (I - S) u: the component of an ambient vector normal to the graph.
Vector project_normal(const Vector& u, const ProjectionPair& planes);

/// Full ambient mean curvature vector of the graph from pointwise (P, Q).
/// Components are expressed in the frame's coordinates (canonical overload:
/// first k = base directions, last n-k = normal directions).
Vector mean_curvature_of_graph(const GradientMatrix& P, const HessianTensor& Q);
Vector mean_curvature_of_graph(const GradientMatrix& P, const HessianTensor& Q,
                               const TangentFrame& frame);

/// Legendre-Hadamard rank-one form of the minimal surface system at P:
/// lhs contracts the hand-differentiated coefficient tensor of
/// sqrt(g) g^{il} P_l^a with xi (x) eta, rhs is the sharp lower bound
/// sqrt(g) |xi|^2 |eta|^2 / (1 + |P|_F^2)^2.
LegendreHadamardResult legendre_hadamard(const GradientMatrix& P, const Vector& xi,
                                         const Vector& eta);

/// n x n embedding of P in a frame: maps tangent basis vectors to their
/// images under P, annihilates the normal complement.
Matrix embed_gradient(const TangentFrame& frame, const GradientMatrix& P);

}  // namespace graflow
