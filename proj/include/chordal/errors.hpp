#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chordal {

/// Base of every error raised by the library. Each subclass maps onto one
/// CLI exit code (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Malformed input files or arguments.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string &what) : Error(what), line_(0) {}
  std::size_t line() const noexcept { return line_; }
  int exit_code() const noexcept override { return 2; }

 private:
  std::size_t line_;
};

class EmptyProblemError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Contract violations by the caller: shapes, signs, off-manifold points.
class PreconditionError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

class DimensionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class ZeroColumnError : public DomainError {
 public:
  explicit ZeroColumnError(std::size_t column)
      : DomainError("zero column at index " + std::to_string(column)),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// Failures of the numerics themselves, raised on valid input.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// A quantity that must be nonzero (Ah, ZA_j, Wh_j, ...) vanished.
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Gram matrix WᵀW failed the positive-definiteness check.
class RankDeficientError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

class SingularityError : public NumericalError {
 public:
  SingularityError(const std::string &what, std::size_t index)
      : NumericalError(what + " (index " + std::to_string(index) + ")"),
        index_(index) {}
  explicit SingularityError(const std::string &what)
      : NumericalError(what), index_(0) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A multiplicative update annihilated every entry of the iterate.
class StallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Two constraint normals are parallel; the joint tangent projector is
/// undefined.
class SingularConstraintError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace chordal
