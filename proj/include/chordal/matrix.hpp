#pragma once

#include <Eigen/Dense>
#include <vector>

namespace chordal {

/// Dense row-major 64-bit matrix; carries M, W, H and every gradient.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Default clamp for element-wise denominators.
inline constexpr double kDefaultFloor = 1e-16;

/// Element-wise nonnegative parts with source = plus - minus.
template <class T>
struct Split {
  T plus;
  T minus;

  T difference() const { return plus - minus; }
};

using SignSplit = Split<Matrix>;
using GradSplit = Split<Vector>;
using MatrixGradSplit = Split<Matrix>;

/// plus = max(0, B), minus = max(0, -B).
SignSplit sign_split(const Matrix &B);
Split<Vector> sign_split(const Vector &b);

/// result = x ⊙ num ⊘ max(den, floor). Throws DimensionError on shape
/// mismatch and DomainError on negative entries.
Matrix mul_div_floor(const Matrix &x, const Matrix &num, const Matrix &den,
                     double floor = kDefaultFloor);
Vector mul_div_floor(const Vector &x, const Vector &num, const Vector &den,
                     double floor = kDefaultFloor);

/// √⟨W, WA⟩_F for symmetric PSD A. Small negative round-off clamps to 0;
/// a clearly negative value (non-PSD A) throws DomainError.
double weighted_norm(const Matrix &W, const Matrix &A);

struct NormalizedColumns {
  Matrix matrix;
  std::vector<double> scales;
};

/// Scales every column to unit ℓ2 norm. Throws ZeroColumnError naming the
/// first zero column.
NormalizedColumns normalize_columns(const Matrix &M);

/// Frobenius inner product.
inline double frob_inner(const Matrix &a, const Matrix &b) {
  return (a.array() * b.array()).sum();
}

void require_same_shape(const Matrix &a, const Matrix &b, const char *what);
bool all_finite(const Matrix &a);
bool all_nonnegative(const Matrix &a);

}  // namespace chordal
