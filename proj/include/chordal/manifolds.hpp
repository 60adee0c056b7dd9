#pragma once

#include "chordal/matrix.hpp"

namespace chordal {

/// Tolerance on |h(x)| accepted for an input point claimed to be on-manifold.
inline constexpr double kOnManifoldTol = 1e-8;

/// The ellipsoid {ξ : ⟨Aξ, ξ⟩ = 1} for a positive-definite A (A = WᵀW in the
/// h-subproblem).
class EllipsoidManifold {
 public:
  /// Throws DimensionError for a non-square A, DomainError if A is not
  /// symmetric, RankDeficientError if the Cholesky factorization fails.
  explicit EllipsoidManifold(Matrix A);

  static EllipsoidManifold from_factor(const Matrix &W);

  const Matrix &metric() const { return A_; }
  Eigen::Index dim() const { return A_.rows(); }

  double norm(const Vector &v) const;
  /// ⟨Aξ, ξ⟩ - 1
  double residual(const Vector &xi) const;

  /// ξ - (⟨Aζ, ξ⟩ / ‖Aζ‖²) Aζ. ζ must be on-manifold.
  Vector project_tangent(const Vector &zeta, const Vector &xi) const;

  /// (ζ + ξ) / ‖ζ + ξ‖_E. Uses the general norm, so ξ need not be tangent.
  /// R(0) returns ζ unchanged.
  Vector retract(const Vector &zeta, const Vector &xi) const;

  /// v / ‖v‖_E; throws DegenerateError when ‖v‖_E is below floor.
  Vector normalize(const Vector &v, double floor = kDefaultFloor) const;

  void require_on_manifold(const Vector &zeta, const char *what) const;

 private:
  Matrix A_;
};

/// Shell of a twisted spectrahedron, {W : ⟨W, W A_j⟩_F = 1} with the rank-1
/// A_j = h hᵀ, paired with B_j = m hᵀ. Only m and h are stored; A_j and B_j
/// are formed on request.
class SpectrahedronShell {
 public:
  /// Throws DomainError on negative entries and DimensionError on empty input.
  SpectrahedronShell(Vector m, Vector h);

  const Vector &data_column() const { return m_; }
  const Vector &coefficients() const { return h_; }
  Eigen::Index rows() const { return m_.size(); }
  Eigen::Index rank() const { return h_.size(); }

  Matrix A() const;
  Matrix B() const;

  /// ⟨Z, Z A_j⟩_F = ‖Z h‖².
  double constraint(const Matrix &Z) const;
  double residual(const Matrix &Z) const { return constraint(Z) - 1.0; }
  /// ‖W‖_{A_j^{1/2}} = ‖W h‖.
  double norm(const Matrix &W) const;
  /// Z A_j, the constraint normal at Z (up to the factor 2).
  Matrix normal(const Matrix &Z) const;
  /// ⟨B_j, W⟩_F = mᵀ W h.
  double numerator(const Matrix &W) const;
  /// ⟨B_j, W⟩_F / ‖W‖_{A_j^{1/2}}, one term of the W-subproblem objective.
  double ratio(const Matrix &W) const;

  /// W - (⟨ZA_j, W⟩_F / ‖ZA_j‖_F²) ZA_j. Throws DegenerateError if ZA_j = 0.
  Matrix project_tangent(const Matrix &Z, const Matrix &W) const;
  /// (Z + W) / ‖Z + W‖_{A_j^{1/2}}; R(0) returns Z unchanged.
  Matrix retract(const Matrix &Z, const Matrix &W) const;
  Matrix normalize(const Matrix &W, double floor = kDefaultFloor) const;

  void require_on_manifold(const Matrix &Z, const char *what) const;
  void require_shape(const Matrix &W, const char *what) const;

 private:
  Vector m_;
  Vector h_;
};

/// Intersection of two shells, {W : ⟨W, WA_1⟩_F = ⟨W, WA_2⟩_F = 1}.
/// Desk-scale validation only; the BCD driver never builds one.
class SpectrahedraPair {
 public:
  SpectrahedraPair(Vector h1, Vector h2);
  /// Takes the A_j of the two shells (their B_j are ignored).
  SpectrahedraPair(const SpectrahedronShell &first,
                   const SpectrahedronShell &second);

  const Matrix &A1() const { return A1_; }
  const Matrix &A2() const { return A2_; }

  /// S_Z = (I ⊗ Z)[vec A_1, vec A_2], an (m·r)×2 matrix (column-major vec).
  Eigen::MatrixXd constraint_basis(const Matrix &Z) const;

  /// S_Z† vec(W). Throws SingularConstraintError when σ_min(S_Z) ≤
  /// 1e-12·σ_max(S_Z).
  Eigen::Vector2d pseudo_inverse_apply(const Matrix &Z, const Matrix &W) const;

  /// W - 2Z(α₁A_1 + α₂A_2) with α = ½ S_Z† vec W.
  Matrix project_tangent(const Matrix &Z, const Matrix &W) const;
  /// As project_tangent, but falls back to the first shell's projector when
  /// the two constraints are parallel.
  Matrix project_tangent_or_fallback(const Matrix &Z, const Matrix &W) const;

  void require_on_manifold(const Matrix &Z, const char *what) const;

 private:
  Vector h1_;
  Vector h2_;
  Matrix A1_;
  Matrix A2_;
};

/// Column-major vectorization, matching the vec used with Kronecker products.
Eigen::VectorXd vec(const Matrix &X);
Matrix unvec(const Eigen::VectorXd &v, Eigen::Index rows, Eigen::Index cols);

}  // namespace chordal
