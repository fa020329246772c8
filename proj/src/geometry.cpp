#include "graflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace graflow {
namespace {

// The metric internals run in extended precision: the invariants downstream
// (inverse residual, determinant identity, spectral bounds) are asserted at
// 1e-12 while g = I + P P^T reaches condition numbers ~ 1 + |P|_F^2, so plain
// double arithmetic would not leave any margin for large gradients.
using ld = long double;

// Row-major s x s helper.
struct LdMat {
  int s = 0;
  std::vector<ld> a;
  explicit LdMat(int n) : s(n), a(static_cast<std::size_t>(n) * n, 0.0L) {}
  ld& at(int i, int j) { return a[static_cast<std::size_t>(i) * s + j]; }
  ld at(int i, int j) const { return a[static_cast<std::size_t>(i) * s + j]; }
  static LdMat identity(int n) {
    LdMat m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0L;
    return m;
  }
};

LdMat mul(const LdMat& x, const LdMat& y) {
  LdMat r(x.s);
  for (int i = 0; i < x.s; ++i)
    for (int j = 0; j < x.s; ++j) {
      ld acc = 0.0L;
      for (int l = 0; l < x.s; ++l) acc += x.at(i, l) * y.at(l, j);
      r.at(i, j) = acc;
    }
  return r;
}

// Gauss-Jordan inverse with partial pivoting; sizes here are <= 3 in
// practice, tiny always.
LdMat invert(LdMat m) {
  const int s = m.s;
  LdMat inv = LdMat::identity(s);
  for (int col = 0; col < s; ++col) {
    int piv = col;
    for (int r = col + 1; r < s; ++r)
      if (fabsl(m.at(r, col)) > fabsl(m.at(piv, col))) piv = r;
    if (m.at(piv, col) == 0.0L) throw std::runtime_error("singular matrix in metric inversion");
    if (piv != col) {
      for (int j = 0; j < s; ++j) {
        std::swap(m.at(piv, j), m.at(col, j));
        std::swap(inv.at(piv, j), inv.at(col, j));
      }
    }
    const ld d = m.at(col, col);
    for (int j = 0; j < s; ++j) {
      m.at(col, j) /= d;
      inv.at(col, j) /= d;
    }
    for (int r = 0; r < s; ++r) {
      if (r == col) continue;
      const ld f = m.at(r, col);
      if (f == 0.0L) continue;
      for (int j = 0; j < s; ++j) {
        m.at(r, j) -= f * m.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return inv;
}

// Cyclic Jacobi eigenvalues of a symmetric matrix. Returns the diagonal
// after convergence (unsorted).
std::vector<ld> jacobi_eigenvalues(LdMat m) {
  const int s = m.s;
  if (s == 1) return {m.at(0, 0)};
  ld scale = 0.0L;
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) scale += m.at(i, j) * m.at(i, j);
  scale = sqrtl(scale);
  const ld tol = (scale > 0.0L ? scale : 1.0L) * 1e-36L;
  for (int sweep = 0; sweep < 128; ++sweep) {
    ld off = 0.0L;
    for (int p = 0; p < s; ++p)
      for (int q = p + 1; q < s; ++q) off += m.at(p, q) * m.at(p, q);
    if (off <= tol * tol) break;
    for (int p = 0; p < s; ++p) {
      for (int q = p + 1; q < s; ++q) {
        const ld apq = m.at(p, q);
        if (apq == 0.0L) continue;
        const ld theta = (m.at(q, q) - m.at(p, p)) / (2.0L * apq);
        const ld t = (theta >= 0.0L ? 1.0L : -1.0L) / (fabsl(theta) + sqrtl(theta * theta + 1.0L));
        const ld c = 1.0L / sqrtl(t * t + 1.0L);
        const ld sn = t * c;
        for (int l = 0; l < s; ++l) {
          const ld mlp = m.at(l, p), mlq = m.at(l, q);
          m.at(l, p) = c * mlp - sn * mlq;
          m.at(l, q) = sn * mlp + c * mlq;
        }
        for (int l = 0; l < s; ++l) {
          const ld mpl = m.at(p, l), mql = m.at(q, l);
          m.at(p, l) = c * mpl - sn * mql;
          m.at(q, l) = sn * mpl + c * mql;
        }
      }
    }
  }
  std::vector<ld> eig(s);
  for (int i = 0; i < s; ++i) eig[i] = m.at(i, i);
  return eig;
}

// Shared extended-precision workspace for one gradient matrix.
struct MetricWork {
  int k = 0, m = 0;
  std::vector<ld> p;       // k x m, row major
  LdMat g{1};              // I + P P^T, k x k
  LdMat g_inv{1};          // refined inverse
  std::vector<ld> w;       // g_inv * P, k x m
  std::vector<ld> cap_m;   // P^T g_inv P, m x m
  std::vector<ld> sig2;    // singular values squared of P, padded to k entries
  ld det = 1.0L;
  ld sqrt_g = 1.0L;
  ld frob_sq = 0.0L;
};

MetricWork metric_work(const GradientMatrix& P) {
  MetricWork wk;
  wk.k = P.dim();
  wk.m = P.codim();
  const int k = wk.k, m = wk.m;
  wk.p.resize(static_cast<std::size_t>(k) * m);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < m; ++a) {
      const ld v = P.entries(i, a);
      wk.p[static_cast<std::size_t>(i) * m + a] = v;
      wk.frob_sq += v * v;
    }
  auto pe = [&](int i, int a) { return wk.p[static_cast<std::size_t>(i) * m + a]; };

  wk.g = LdMat(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      ld acc = (i == j) ? 1.0L : 0.0L;
      for (int a = 0; a < m; ++a) acc += pe(i, a) * pe(j, a);
      wk.g.at(i, j) = acc;
    }

  // Spectrum of P from the smaller Gram matrix; the k x k side has the same
  // nonzero eigenvalues padded with zeros.
  const int s = std::min(k, m);
  LdMat gram(s);
  if (m <= k) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        ld acc = 0.0L;
        for (int i = 0; i < k; ++i) acc += pe(i, a) * pe(i, b);
        gram.at(a, b) = acc;
      }
  } else {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) gram.at(i, j) = wk.g.at(i, j) - (i == j ? 1.0L : 0.0L);
  }
  std::vector<ld> sig2 = jacobi_eigenvalues(gram);
  for (ld& v : sig2) v = std::max(v, 0.0L);
  sig2.resize(k, 0.0L);
  std::sort(sig2.begin(), sig2.end());
  wk.sig2 = sig2;

  // det(I + P P^T) = prod(1 + sigma_i^2): a product of terms >= 1, no
  // cancellation even for near-singular Gram matrices.
  wk.det = 1.0L;
  for (ld v : sig2) wk.det *= 1.0L + v;
  wk.sqrt_g = sqrtl(wk.det);

  // Inverse: Woodbury through the m x m capacitance when the codimension is
  // the small side, direct otherwise, then one Newton refinement step
  // X <- X (2I - g X).
  if (m <= k) {
    LdMat cap(m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        ld acc = (a == b) ? 1.0L : 0.0L;
        for (int i = 0; i < k; ++i) acc += pe(i, a) * pe(i, b);
        cap.at(a, b) = acc;
      }
    LdMat cap_inv = invert(cap);
    wk.g_inv = LdMat(k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        ld acc = (i == j) ? 1.0L : 0.0L;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) acc -= pe(i, a) * cap_inv.at(a, b) * pe(j, b);
        wk.g_inv.at(i, j) = acc;
      }
  } else {
    wk.g_inv = invert(wk.g);
  }
  {
    LdMat gx = mul(wk.g, wk.g_inv);
    LdMat two_minus(wk.k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) two_minus.at(i, j) = (i == j ? 2.0L : 0.0L) - gx.at(i, j);
    wk.g_inv = mul(wk.g_inv, two_minus);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        const ld sym = (wk.g_inv.at(i, j) + wk.g_inv.at(j, i)) / 2.0L;
        wk.g_inv.at(i, j) = sym;
        wk.g_inv.at(j, i) = sym;
      }
  }

  wk.w.assign(static_cast<std::size_t>(k) * m, 0.0L);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < m; ++a) {
      ld acc = 0.0L;
      for (int l = 0; l < k; ++l) acc += wk.g_inv.at(i, l) * pe(l, a);
      wk.w[static_cast<std::size_t>(i) * m + a] = acc;
    }
  wk.cap_m.assign(static_cast<std::size_t>(m) * m, 0.0L);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      ld acc = 0.0L;
      for (int i = 0; i < k; ++i) acc += pe(i, a) * wk.w[static_cast<std::size_t>(i) * m + b];
      wk.cap_m[static_cast<std::size_t>(a) * m + b] = acc;
    }
  return wk;
}

void require_finite_gradient(const GradientMatrix& P) {
  if (P.dim() < 1 || P.codim() < 1) throw std::invalid_argument("gradient matrix must be nonempty");
  if (!P.finite()) throw std::invalid_argument("gradient matrix has non-finite entries");
}

}  // namespace

MetricPack induced_metric(const GradientMatrix& P) {
  require_finite_gradient(P);
  const MetricWork wk = metric_work(P);
  const int k = wk.k;
  MetricPack mp;
  mp.g = Matrix::Identity(k, k) + P.entries * P.entries.transpose();
  mp.g_inv = Matrix(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) mp.g_inv(i, j) = static_cast<double>(wk.g_inv.at(i, j));
  mp.sqrt_g = static_cast<double>(wk.sqrt_g);
  mp.eig_min = static_cast<double>(1.0L / (1.0L + wk.sig2.back()));
  mp.eig_max = static_cast<double>(1.0L / (1.0L + wk.sig2.front()));
  return mp;
}

TangentFrame TangentFrame::canonical(int n, int k) {
  if (k < 1 || k >= n) throw std::invalid_argument("frame needs 1 <= k < n");
  TangentFrame f;
  f.n = n;
  f.k = k;
  f.rotation = Matrix::Identity(n, n);
  return f;
}

TangentFrame TangentFrame::from_basis(const Matrix& basis) {
  const int n = static_cast<int>(basis.rows());
  const int k = static_cast<int>(basis.cols());
  if (k < 1 || k >= n) throw std::invalid_argument("frame needs 1 <= k < n");
  const Matrix gram = basis.transpose() * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.eigenvalues().minCoeff() < 1e-12)
    throw std::invalid_argument("invalid frame: rank-deficient basis");
  if ((gram - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("invalid frame: basis is not orthonormal");

  TangentFrame f;
  f.n = n;
  f.k = k;
  f.rotation = Matrix::Zero(n, n);
  f.rotation.leftCols(k) = basis;
  // Complete with coordinate directions, largest residual first; two
  // orthogonalization passes keep the completion orthonormal to roundoff.
  int filled = k;
  std::vector<bool> used(n, false);
  while (filled < n) {
    int best = -1;
    double best_norm = -1.0;
    Vector best_res;
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      Vector r = Vector::Unit(n, j);
      for (int pass = 0; pass < 2; ++pass)
        for (int c = 0; c < filled; ++c) r -= f.rotation.col(c).dot(r) * f.rotation.col(c);
      const double nr = r.norm();
      if (nr > best_norm) {
        best_norm = nr;
        best = j;
        best_res = r;
      }
    }
    used[best] = true;
    f.rotation.col(filled) = best_res / best_norm;
    ++filled;
  }
  return f;
}

ProjectionPair graph_tangent_plane(const TangentFrame& frame, const GradientMatrix& P) {
  return graph_tangent_plane(frame, P, induced_metric(P));
}

ProjectionPair graph_tangent_plane(const TangentFrame& frame, const GradientMatrix& P,
                                   const MetricPack& mp) {
  require_finite_gradient(P);
  const int k = P.dim(), m = P.codim(), n = k + m;
  if (frame.n != n || frame.k != k)
    throw std::invalid_argument("frame dimensions do not match gradient matrix");

  // Canonical tangent basis of the graph: b_i = e_i + P_i^a e_{k+a}.
  Matrix b = Matrix::Zero(n, k);
  b.topRows(k) = Matrix::Identity(k, k);
  b.bottomRows(m) = P.entries.transpose();
  Matrix s_canon = b * mp.g_inv * b.transpose();
  s_canon = ((s_canon + s_canon.transpose()) / 2.0).eval();

  Matrix t_canon = Matrix::Zero(n, n);
  t_canon.topLeftCorner(k, k) = Matrix::Identity(k, k);

  const Matrix& r = frame.rotation;
  ProjectionPair pp;
  pp.base = r * t_canon * r.transpose();
  pp.graph = r * s_canon * r.transpose();
  pp.base_perp = Matrix::Identity(n, n) - pp.base;
  pp.graph_perp = Matrix::Identity(n, n) - pp.graph;
  return pp;
}

ProjectionPair graph_tangent_plane(const GradientMatrix& P) {
  return graph_tangent_plane(TangentFrame::canonical(P.dim() + P.codim(), P.dim()), P);
}

Vector project_normal(const Vector& u, const ProjectionPair& planes) {
  if (u.size() != planes.graph.rows())
    throw std::invalid_argument("vector dimension does not match projection");
  if (!u.allFinite()) throw std::invalid_argument("non-finite vector");
  return planes.graph_perp * u;
}

Vector mean_curvature_of_graph(const GradientMatrix& P, const HessianTensor& Q) {
  require_finite_gradient(P);
  if (Q.dim() != P.dim() || Q.codim() != P.codim())
    throw std::invalid_argument("hessian dimensions do not match gradient");
  if (!Q.finite()) throw std::invalid_argument("hessian has non-finite entries");
  const int k = P.dim(), m = P.codim();
  const MetricPack mp = induced_metric(P);

  // Pointwise expansion of the divergence-form components
  //   h^j = (1/sqrt g) d_i(sqrt g g^{ij}),
  //   h^a = (1/sqrt g) d_i(sqrt g g^{ij} d_j f^a)
  // with d(sqrt g)/dP_l^b = sqrt g W_l^b and
  // d g^{ij}/dP_l^b = -(g^{il} W_j^b + g^{jl} W_i^b), W = g^{-1} P.
  // Contracting against the symmetric Q collapses to
  //   h_tang = -W trQ,  h_norm = trQ + P^T h_tang,  trQ^b = g^{il} Q_{il}^b,
  // which is S-orthogonal by construction.
  Vector tr_q = Vector::Zero(m);
  for (int b = 0; b < m; ++b) {
    double acc = 0.0;
    for (int i = 0; i < k; ++i)
      for (int l = 0; l < k; ++l) acc += mp.g_inv(i, l) * Q(i, l, b);
    tr_q(b) = acc;
  }
  const Matrix w = mp.g_inv * P.entries;  // k x m
  Vector h(k + m);
  h.head(k) = -w * tr_q;
  h.tail(m) = tr_q + P.entries.transpose() * h.head(k);
  return h;
}

Vector mean_curvature_of_graph(const GradientMatrix& P, const HessianTensor& Q,
                               const TangentFrame& frame) {
  if (frame.n != P.dim() + P.codim() || frame.k != P.dim())
    throw std::invalid_argument("frame dimensions do not match gradient matrix");
  return frame.rotation * mean_curvature_of_graph(P, Q);
}

LegendreHadamardResult legendre_hadamard(const GradientMatrix& P, const Vector& xi,
                                         const Vector& eta) {
  require_finite_gradient(P);
  const int k = P.dim(), m = P.codim();
  if (xi.size() != k || eta.size() != m)
    throw std::invalid_argument("xi/eta dimensions do not match gradient");
  const MetricWork wk = metric_work(P);
  auto we = [&](int i, int a) { return wk.w[static_cast<std::size_t>(i) * m + a]; };
  auto me = [&](int a, int b) { return wk.cap_m[static_cast<std::size_t>(a) * m + b]; };

  // Coefficient tensor of the minimal surface system, differentiated by hand
  // from A^{il} = sqrt(g) g^{il} with W = g^{-1}P, M = P^T g^{-1} P:
  //   d(sqrt g)/dP_j^b          = sqrt(g) W_j^b
  //   d(g^{il})/dP_j^b          = -(g^{ij} W_l^b + g^{lj} W_i^b)
  //   sum_l d(A^{il} P_l^a)/dP_j^b
  //     = sqrt(g) [ g^{ij} (delta^{ab} - M^{ab}) + W_i^a W_j^b - W_i^b W_j^a ].
  ld lhs = 0.0L;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const ld coeff = wk.sqrt_g * (wk.g_inv.at(i, j) * ((a == b ? 1.0L : 0.0L) - me(a, b)) +
                                        we(i, a) * we(j, b) - we(i, b) * we(j, a));
          lhs += coeff * (ld)xi(i) * (ld)xi(j) * (ld)eta(a) * (ld)eta(b);
        }

  ld xi2 = 0.0L, eta2 = 0.0L;
  for (int i = 0; i < k; ++i) xi2 += (ld)xi(i) * (ld)xi(i);
  for (int a = 0; a < m; ++a) eta2 += (ld)eta(a) * (ld)eta(a);
  const ld denom = (1.0L + wk.frob_sq) * (1.0L + wk.frob_sq);
  LegendreHadamardResult out;
  out.lhs = static_cast<double>(lhs);
  out.rhs = static_cast<double>(wk.sqrt_g * xi2 * eta2 / denom);
  return out;
}

Matrix embed_gradient(const TangentFrame& frame, const GradientMatrix& P) {
  if (frame.n != P.dim() + P.codim() || frame.k != P.dim())
    throw std::invalid_argument("frame dimensions do not match gradient matrix");
  return frame.normal_basis() * P.entries.transpose() * frame.tangent_basis().transpose();
}

}  // namespace graflow
