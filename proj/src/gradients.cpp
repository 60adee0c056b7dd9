#include "chordal/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chordal/errors.hpp"

namespace chordal {

namespace {

void check_quotient_shapes(const Matrix &A, const Vector &b, const Vector &c,
                           const Matrix &D, const Vector &e, const Vector &x) {
  if (A.cols() != x.size() || D.cols() != x.size() || A.rows() != b.size() ||
      A.rows() != c.size() || D.rows() != e.size()) {
    throw DimensionError("quotient: inconsistent operand shapes");
  }
}

void check_factor_shapes(const Matrix &M, const Matrix &W, const Matrix &H) {
  if (W.rows() != M.rows() || H.cols() != M.cols() || W.cols() != H.rows()) {
    throw DimensionError("chordal objective: M, W, H shapes are inconsistent");
  }
}

}  // namespace

double quotient_value(const Matrix &A, const Vector &b, const Vector &c,
                      const Matrix &D, const Vector &e, const Vector &x) {
  check_quotient_shapes(A, b, c, D, e, x);
  return (A * x + b).dot(c) / (D * x + e).norm();
}

Vector quotient_grad(const Matrix &A, const Vector &b, const Vector &c,
                     const Matrix &D, const Vector &e, const Vector &x,
                     double floor) {
  check_quotient_shapes(A, b, c, D, e, x);
  const Vector denom_vec = D * x + e;
  const double d = denom_vec.norm();
  if (d < floor) throw SingularityError("quotient_grad: ||Dx + e|| vanishes");
  const double numer = (A * x + b).dot(c);
  return (d * d * (A.transpose() * c) - numer * (D.transpose() * denom_vec)) /
         (d * d * d);
}

double chordal_objective(const Matrix &M, const Matrix &W, const Matrix &H) {
  check_factor_shapes(M, W, H);
  if (M.cols() == 0) throw EmptyProblemError("chordal objective: no columns");
  const Matrix WH = W * H;
  double total = 0.0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double d = WH.col(j).norm();
    if (d == 0.0) {
      throw DegenerateError("chordal objective: W h_j vanishes at column " +
                            std::to_string(j));
    }
    const double mn = M.col(j).norm();
    if (mn == 0.0) throw ZeroColumnError(static_cast<std::size_t>(j));
    const double cosine = std::clamp(M.col(j).dot(WH.col(j)) / (mn * d), -1.0, 1.0);
    total += 1.0 - cosine;
  }
  return total / static_cast<double>(M.cols());
}

double chordal_objective_lenient(const Matrix &M, const Matrix &W, const Matrix &H) {
  check_factor_shapes(M, W, H);
  if (M.cols() == 0) throw EmptyProblemError("chordal objective: no columns");
  const Matrix WH = W * H;
  double total = 0.0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double d = WH.col(j).norm();
    const double mn = M.col(j).norm();
    double cosine = 0.0;
    if (d > 0.0 && mn > 0.0) {
      cosine = std::clamp(M.col(j).dot(WH.col(j)) / (mn * d), -1.0, 1.0);
    }
    total += 1.0 - cosine;
  }
  return total / static_cast<double>(M.cols());
}

GradSplit h_grad_split(const Matrix &W, const Vector &m, const Vector &h) {
  if (W.rows() != m.size()) throw DimensionError("h_grad_split: rows(W) != dim(m)");
  const EllipsoidManifold E = EllipsoidManifold::from_factor(W);
  return h_grad_split(E, W.transpose() * m, h);
}

GradSplit h_grad_split(const EllipsoidManifold &E, const Vector &wtm, const Vector &h) {
  if (wtm.size() != E.dim() || h.size() != E.dim()) {
    throw DimensionError("h_grad_split: dimension mismatch");
  }
  E.require_on_manifold(h, "h_grad_split");
  const Vector Ah = E.metric() * h;
  const double nn = Ah.squaredNorm();
  if (nn == 0.0) throw DegenerateError("h_grad_split: A h vanishes");
  return {Ah * (Ah.dot(wtm) / nn), wtm};
}

double w_ratio_sum(const Matrix &W, const std::vector<SpectrahedronShell> &shells) {
  double total = 0.0;
  for (std::size_t j = 0; j < shells.size(); ++j) {
    const auto &s = shells[j];
    s.require_shape(W, "w_ratio_sum");
    if (s.coefficients().isZero(0.0)) continue;
    const Vector wh = W * s.coefficients();
    const double d = wh.norm();
    if (d == 0.0) throw SingularityError("w_ratio_sum: W h_j vanishes", j);
    total += s.data_column().dot(wh) / d;
  }
  return total;
}

Matrix w_euclidean_grad(const Matrix &W, const std::vector<SpectrahedronShell> &shells,
                        double floor) {
  Matrix G = Matrix::Zero(W.rows(), W.cols());
  for (std::size_t j = 0; j < shells.size(); ++j) {
    const auto &s = shells[j];
    s.require_shape(W, "w_euclidean_grad");
    const Vector &h = s.coefficients();
    if (h.isZero(0.0)) continue;
    const Vector wh = W * h;
    const double sq = wh.squaredNorm();
    if (sq < floor) throw SingularityError("w_euclidean_grad: <W, W A_j> vanishes", j);
    const double d = std::sqrt(sq);
    const double numer = s.data_column().dot(wh);
    // B_j / d - numer · (Wh)hᵀ / d³, collected as a rank-1 update.
    const Vector coeff = s.data_column() / d - (numer / (sq * d)) * wh;
    G.noalias() += coeff * h.transpose();
  }
  return G;
}

std::vector<SpectrahedronShell> make_shells(const Matrix &M, const Matrix &H) {
  if (M.cols() != H.cols()) throw DimensionError("make_shells: column counts differ");
  std::vector<SpectrahedronShell> shells;
  shells.reserve(static_cast<std::size_t>(M.cols()));
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    shells.emplace_back(M.col(j), H.col(j));
  }
  return shells;
}

MatrixGradSplit w_grad_split_n1(const SpectrahedronShell &S, const Matrix &Z) {
  S.require_on_manifold(Z, "w_grad_split_n1");
  const Matrix N = S.normal(Z);
  const double nn = N.squaredNorm();
  if (nn == 0.0) throw DegenerateError("w_grad_split_n1: Z A_j vanishes");
  Matrix B = S.B();
  Matrix plus = N * (frob_inner(N, B) / nn);
  return {std::move(plus), std::move(B)};
}

Matrix spectrahedra2_riemannian_grad(const SpectrahedraPair &P, const Matrix &Z,
                                     const Matrix &euclid_grad) {
  P.require_on_manifold(Z, "spectrahedra2_riemannian_grad");
  const Eigen::Vector2d coeff = P.pseudo_inverse_apply(Z, euclid_grad);
  return euclid_grad - Z * (coeff(0) * P.A1() + coeff(1) * P.A2());
}

}  // namespace chordal
