#pragma once

#include <vector>

#include "chordal/manifolds.hpp"
#include "chordal/matrix.hpp"

namespace chordal {

/// f(x) = ⟨Ax + b, c⟩ / ‖Dx + e‖₂
double quotient_value(const Matrix &A, const Vector &b, const Vector &c,
                      const Matrix &D, const Vector &e, const Vector &x);

/// Euclidean gradient of quotient_value:
///   (‖Dx+e‖² Aᵀc - ⟨Ax+b, c⟩ Dᵀ(Dx+e)) / ‖Dx+e‖³
/// Throws SingularityError when ‖Dx+e‖ < floor.
Vector quotient_grad(const Matrix &A, const Vector &b, const Vector &c,
                     const Matrix &D, const Vector &e, const Vector &x,
                     double floor = kDefaultFloor);

/// (1/n) Σ_j (1 - cos∠(m_j, W h_j)). Columns of M are expected to be unit
/// norm; the cosine divides by ‖m_j‖ anyway so raw matrices work too.
/// Throws DegenerateError naming j when W h_j = 0.
double chordal_objective(const Matrix &M, const Matrix &W, const Matrix &H);

/// As chordal_objective, but a vanishing W h_j contributes the worst value 1
/// instead of throwing. Used for baseline traces.
double chordal_objective_lenient(const Matrix &M, const Matrix &W, const Matrix &H);

/// Split of the Riemannian gradient of φ(h) = 1 - ⟨m, W h⟩ on the ellipsoid
/// of WᵀW:
///   plus  = A h · ⟨A h, Wᵀm⟩ / ‖A h‖²,  minus = Wᵀm.
GradSplit h_grad_split(const Matrix &W, const Vector &m, const Vector &h);

/// Same, with the manifold and Wᵀm precomputed (they are fixed for every
/// iteration of one column solve).
GradSplit h_grad_split(const EllipsoidManifold &E, const Vector &wtm, const Vector &h);

/// Σ_j ⟨B_j, W⟩ / ‖W‖_{A_j^{1/2}}, the maximized W-subproblem objective.
/// Shells with h_j = 0 are skipped.
double w_ratio_sum(const Matrix &W, const std::vector<SpectrahedronShell> &shells);

/// Euclidean gradient of w_ratio_sum:
///   Σ_j B_j / s_j^{1/2} - ⟨B_j, W⟩ W A_j / s_j^{3/2},  s_j = ⟨W, W A_j⟩_F.
/// Shells with h_j = 0 are skipped; any other s_j below floor throws
/// SingularityError naming j.
Matrix w_euclidean_grad(const Matrix &W, const std::vector<SpectrahedronShell> &shells,
                        double floor = kDefaultFloor);

/// Builds the shells (m_j, h_j) for every column of M and H.
std::vector<SpectrahedronShell> make_shells(const Matrix &M, const Matrix &H);

/// Riemannian gradient split of -⟨B_j, W⟩ on a single shell at Z:
///   plus = Z A_j ⟨Z A_j, B_j⟩_F / ‖Z A_j‖_F²,  minus = B_j.
MatrixGradSplit w_grad_split_n1(const SpectrahedronShell &S, const Matrix &Z);

/// g - Z((S_Z† vec g)₁ A_1 + (S_Z† vec g)₂ A_2).
Matrix spectrahedra2_riemannian_grad(const SpectrahedraPair &P, const Matrix &Z,
                                     const Matrix &euclid_grad);

}  // namespace chordal
