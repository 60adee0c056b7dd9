#include "chordal/matrix.hpp"

#include <cmath>
#include <string>

#include "chordal/errors.hpp"

namespace chordal {

namespace {

template <class T>
T mul_div_floor_impl(const T &x, const T &num, const T &den, double floor) {
  if (x.rows() != num.rows() || x.cols() != num.cols() ||
      x.rows() != den.rows() || x.cols() != den.cols()) {
    throw DimensionError("mul_div_floor: operand shapes differ");
  }
  if (!(floor > 0.0)) throw DomainError("mul_div_floor: floor must be positive");
  if ((x.array() < 0.0).any() || (num.array() < 0.0).any() ||
      (den.array() < 0.0).any()) {
    throw DomainError("mul_div_floor: operands must be nonnegative");
  }
  return (x.array() * num.array() / den.array().max(floor)).matrix();
}

}  // namespace

SignSplit sign_split(const Matrix &B) {
  return {B.cwiseMax(0.0), (-B).cwiseMax(0.0)};
}

Split<Vector> sign_split(const Vector &b) {
  return {b.cwiseMax(0.0), (-b).cwiseMax(0.0)};
}

Matrix mul_div_floor(const Matrix &x, const Matrix &num, const Matrix &den,
                     double floor) {
  return mul_div_floor_impl(x, num, den, floor);
}

Vector mul_div_floor(const Vector &x, const Vector &num, const Vector &den,
                     double floor) {
  return mul_div_floor_impl(x, num, den, floor);
}

double weighted_norm(const Matrix &W, const Matrix &A) {
  if (A.rows() != A.cols() || W.cols() != A.rows()) {
    throw DimensionError("weighted_norm: need cols(W) == rows(A) == cols(A)");
  }
  const double value = frob_inner(W, W * A);
  // Round-off on a PSD A can leave a tiny negative; scale the tolerance with
  // the magnitudes involved.
  const double tol = 1e-12 * (1.0 + W.squaredNorm() * A.norm());
  if (value < -tol) {
    throw DomainError("weighted_norm: <W, WA>_F is negative, A is not PSD");
  }
  return std::sqrt(std::max(value, 0.0));
}

NormalizedColumns normalize_columns(const Matrix &M) {
  NormalizedColumns out{M, std::vector<double>(static_cast<std::size_t>(M.cols()))};
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double norm = M.col(j).norm();
    if (norm == 0.0) throw ZeroColumnError(static_cast<std::size_t>(j));
    out.matrix.col(j) /= norm;
    out.scales[static_cast<std::size_t>(j)] = norm;
  }
  return out;
}

void require_same_shape(const Matrix &a, const Matrix &b, const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch (" +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
}

bool all_finite(const Matrix &a) { return a.allFinite(); }

bool all_nonnegative(const Matrix &a) { return (a.array() >= 0.0).all(); }

}  // namespace chordal
