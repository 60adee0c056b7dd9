#include "chordal/manifolds.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "chordal/errors.hpp"

namespace chordal {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPairOnManifoldTol = 1e-6;
constexpr double kPairSingularCutoff = 1e-12;

// Smallest accepted Cholesky pivot, relative to the largest diagonal entry.
// Pivots at round-off level mean the Gram matrix is numerically singular
// even when LLT itself reports success.
constexpr double kRelativePivotTol = 64.0 * std::numeric_limits<double>::epsilon();

}  // namespace

EllipsoidManifold::EllipsoidManifold(Matrix A) : A_(std::move(A)) {
  if (A_.rows() == 0 || A_.rows() != A_.cols()) {
    throw DimensionError("EllipsoidManifold: metric must be square and nonempty");
  }
  if (!A_.allFinite()) throw DomainError("EllipsoidManifold: non-finite metric");
  const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw DomainError("EllipsoidManifold: metric is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A_);
  if (llt.info() != Eigen::Success) {
    throw RankDeficientError("EllipsoidManifold: metric is not positive definite");
  }
  const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal();
  const double max_diag = A_.diagonal().maxCoeff();
  if (pivots.cwiseAbs2().minCoeff() <= kRelativePivotTol * max_diag) {
    throw RankDeficientError("EllipsoidManifold: metric is numerically singular");
  }
}

EllipsoidManifold EllipsoidManifold::from_factor(const Matrix &W) {
  return EllipsoidManifold(W.transpose() * W);
}

double EllipsoidManifold::norm(const Vector &v) const {
  return std::sqrt(std::max(0.0, v.dot(A_ * v)));
}

double EllipsoidManifold::residual(const Vector &xi) const {
  if (xi.size() != dim()) throw DimensionError("ellipsoid residual: wrong dimension");
  return xi.dot(A_ * xi) - 1.0;
}

void EllipsoidManifold::require_on_manifold(const Vector &zeta, const char *what) const {
  if (std::abs(residual(zeta)) > kOnManifoldTol) {
    throw PreconditionError(std::string(what) + ": point is off the ellipsoid");
  }
}

Vector EllipsoidManifold::project_tangent(const Vector &zeta, const Vector &xi) const {
  if (xi.size() != dim()) throw DimensionError("ellipsoid projector: wrong dimension");
  require_on_manifold(zeta, "ellipsoid projector");
  const Vector normal = A_ * zeta;
  const double nn = normal.squaredNorm();
  if (nn == 0.0) throw DegenerateError("ellipsoid projector: A*zeta vanishes");
  return xi - (normal.dot(xi) / nn) * normal;
}

Vector EllipsoidManifold::retract(const Vector &zeta, const Vector &xi) const {
  if (xi.size() != dim()) throw DimensionError("ellipsoid retraction: wrong dimension");
  require_on_manifold(zeta, "ellipsoid retraction");
  if (xi.isZero(0.0)) return zeta;
  return normalize(zeta + xi);
}

Vector EllipsoidManifold::normalize(const Vector &v, double floor) const {
  const double n = norm(v);
  if (!(n >= floor) || n == 0.0) {
    throw DegenerateError("ellipsoid: direction has vanishing manifold norm");
  }
  return v / n;
}

SpectrahedronShell::SpectrahedronShell(Vector m, Vector h)
    : m_(std::move(m)), h_(std::move(h)) {
  if (m_.size() == 0 || h_.size() == 0) {
    throw DimensionError("SpectrahedronShell: empty column pair");
  }
  if ((m_.array() < 0.0).any() || (h_.array() < 0.0).any()) {
    throw DomainError("SpectrahedronShell: column pair must be nonnegative");
  }
}

Matrix SpectrahedronShell::A() const { return h_ * h_.transpose(); }

Matrix SpectrahedronShell::B() const { return m_ * h_.transpose(); }

void SpectrahedronShell::require_shape(const Matrix &W, const char *what) const {
  if (W.rows() != rows() || W.cols() != rank()) {
    throw DimensionError(std::string(what) + ": matrix must be " +
                         std::to_string(rows()) + "x" + std::to_string(rank()));
  }
}

double SpectrahedronShell::constraint(const Matrix &Z) const {
  require_shape(Z, "shell constraint");
  return (Z * h_).squaredNorm();
}

double SpectrahedronShell::norm(const Matrix &W) const {
  require_shape(W, "shell norm");
  return (W * h_).norm();
}

Matrix SpectrahedronShell::normal(const Matrix &Z) const {
  require_shape(Z, "shell normal");
  return (Z * h_) * h_.transpose();
}

double SpectrahedronShell::numerator(const Matrix &W) const {
  require_shape(W, "shell numerator");
  return m_.dot(W * h_);
}

double SpectrahedronShell::ratio(const Matrix &W) const {
  const Vector wh = W * h_;
  const double d = wh.norm();
  if (d == 0.0) throw SingularityError("shell ratio: W h vanishes");
  return m_.dot(wh) / d;
}

void SpectrahedronShell::require_on_manifold(const Matrix &Z, const char *what) const {
  if (std::abs(residual(Z)) > kOnManifoldTol) {
    throw PreconditionError(std::string(what) + ": point is off the shell");
  }
}

Matrix SpectrahedronShell::project_tangent(const Matrix &Z, const Matrix &W) const {
  require_shape(W, "shell projector");
  require_on_manifold(Z, "shell projector");
  const Matrix N = normal(Z);
  const double nn = N.squaredNorm();
  if (nn == 0.0) throw DegenerateError("shell projector: Z A_j vanishes");
  return W - (frob_inner(N, W) / nn) * N;
}

Matrix SpectrahedronShell::retract(const Matrix &Z, const Matrix &W) const {
  require_shape(W, "shell retraction");
  require_on_manifold(Z, "shell retraction");
  if (W.isZero(0.0)) return Z;
  return normalize(Z + W);
}

Matrix SpectrahedronShell::normalize(const Matrix &W, double floor) const {
  const double n = norm(W);
  if (!(n >= floor) || n == 0.0) {
    throw DegenerateError("shell: (Z + W) h vanishes");
  }
  return W / n;
}

SpectrahedraPair::SpectrahedraPair(Vector h1, Vector h2)
    : h1_(std::move(h1)), h2_(std::move(h2)) {
  if (h1_.size() == 0 || h1_.size() != h2_.size()) {
    throw DimensionError("SpectrahedraPair: coefficient vectors must share a size");
  }
  A1_ = h1_ * h1_.transpose();
  A2_ = h2_ * h2_.transpose();
}

SpectrahedraPair::SpectrahedraPair(const SpectrahedronShell &first,
                                   const SpectrahedronShell &second)
    : SpectrahedraPair(first.coefficients(), second.coefficients()) {}

void SpectrahedraPair::require_on_manifold(const Matrix &Z, const char *what) const {
  if (Z.cols() != A1_.rows()) {
    throw DimensionError(std::string(what) + ": column count must match the rank");
  }
  const double r1 = (Z * h1_).squaredNorm() - 1.0;
  const double r2 = (Z * h2_).squaredNorm() - 1.0;
  if (std::abs(r1) > kPairOnManifoldTol || std::abs(r2) > kPairOnManifoldTol) {
    throw PreconditionError(std::string(what) + ": point is off the spectrahedra");
  }
}

Eigen::MatrixXd SpectrahedraPair::constraint_basis(const Matrix &Z) const {
  // (I ⊗ Z) vec(A) = vec(Z A)
  Eigen::MatrixXd S(Z.rows() * Z.cols(), 2);
  S.col(0) = vec(Z * A1_);
  S.col(1) = vec(Z * A2_);
  return S;
}

Eigen::Vector2d SpectrahedraPair::pseudo_inverse_apply(const Matrix &Z,
                                                       const Matrix &W) const {
  require_same_shape(Z, W, "spectrahedra pseudo-inverse");
  const Eigen::MatrixXd S = constraint_basis(Z);
  // Rank decision from the singular values of S itself; forming SᵀS first
  // would square the condition number and hide exact parallelism.
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sigma = svd.singularValues();
  if (sigma(0) == 0.0 || sigma(1) <= kPairSingularCutoff * sigma(0)) {
    throw SingularConstraintError("spectrahedra: constraint normals are parallel");
  }
  return svd.solve(vec(W));
}

Matrix SpectrahedraPair::project_tangent(const Matrix &Z, const Matrix &W) const {
  require_on_manifold(Z, "spectrahedra projector");
  const Eigen::Vector2d alpha = 0.5 * pseudo_inverse_apply(Z, W);
  return W - 2.0 * Z * (alpha(0) * A1_ + alpha(1) * A2_);
}

Matrix SpectrahedraPair::project_tangent_or_fallback(const Matrix &Z,
                                                     const Matrix &W) const {
  try {
    return project_tangent(Z, W);
  } catch (const SingularConstraintError &) {
    const Matrix N = Z * A1_;
    const double nn = N.squaredNorm();
    if (nn == 0.0) throw DegenerateError("spectrahedra fallback: Z A_1 vanishes");
    return W - (frob_inner(N, W) / nn) * N;
  }
}

Eigen::VectorXd vec(const Matrix &X) {
  Eigen::VectorXd v(X.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) v(k++) = X(i, j);
  }
  return v;
}

Matrix unvec(const Eigen::VectorXd &v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
  Matrix X(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = v(k++);
  }
  return X;
}

}  // namespace chordal
