#pragma once

#include <iosfwd>
#include <string>

#include "chordal/matrix.hpp"

namespace chordal {

/// Comma-separated decimal floats, one row per line, no header. Blank lines
/// at the end of the input are ignored. Throws ParseError (with the 1-based
/// line number where it applies) on empty input, ragged rows, and tokens
/// that are not finite numbers.
Matrix parse_matrix_csv(std::istream &is);
Matrix read_matrix_csv(const std::string &path);

/// Writes every entry with 17 significant digits, so reading back is exact.
void format_matrix_csv(std::ostream &os, const Matrix &M);
void write_matrix_csv(const std::string &path, const Matrix &M);

/// "%.17g"
std::string format_double(double v);

}  // namespace chordal
