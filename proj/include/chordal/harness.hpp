#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chordal/matrix.hpp"
#include "chordal/nmf.hpp"

namespace chordal {

struct SynthSpec {
  double epsilon = 0.1;
  double delta = 1.0;

  /// Throws PreconditionError unless ε ∈ (0, 0.5) and δ ∈ (0, 1].
  void validate() const;
};

struct SynthInstance {
  Matrix M;       // 3×6
  Matrix W_true;  // 3×3
  Matrix H_true;  // 3×6
};

/// The cone instance: W_true has 0.8 on the diagonal and 0.1 elsewhere;
/// column 2k-1 of H_true is (1-ε)e_k + ε(1 - e_k) and column 2k is δ times it.
SynthInstance synth_generate(const SynthSpec &spec);

/// ‖X - X_true‖_F / ‖X_true‖_F. Throws DomainError if X_true = 0.
double rel_error(const Matrix &X, const Matrix &X_true);

struct Alignment {
  double error = 0.0;
  /// perm[k] is the column of W matched to column k of W_true.
  std::vector<int> perm;
};

/// Best column permutation of W against W_true after scaling every column
/// of both to unit ℓ2 norm. Exhaustive search; rank at most 8.
Alignment w_alignment(const Matrix &W, const Matrix &W_true);
double w_aligned_error(const Matrix &W, const Matrix &W_true);

struct SidSam {
  double value = 0.0;
  double sid = 0.0;
  double angle = 0.0;  // radians
  /// True if some normalized entry was below floor and got raised to it.
  bool floored = false;
};

/// SID × tan(angle) with ℓ2-normalized spectra. floor = 0 disables the
/// flooring; a zero channel then makes the divergence infinite.
SidSam sid_sam(const Vector &t, const Vector &r, double floor = 1e-12);

enum class Method { chordal, fro_hals };
Method parse_method(const std::string &name);
const char *to_string(Method m);

enum class HAlign { truth, none };
HAlign parse_h_align(const std::string &name);

struct GridOptions {
  std::vector<double> epsilons;
  std::vector<double> deltas;
  std::vector<Method> methods;
  /// rank and seed are overwritten per cell.
  BcdConfig bcd;
  /// HALS sweeps; negative means "same as bcd.outer_iters".
  int hals_iters = -1;
  std::uint64_t seed = 0;
  /// truth: before H is compared, the columns of W are matched to W_true
  /// (w_alignment), rescaled to the norms of W_true, and the rows of H are
  /// permuted and inversely rescaled. none: H is compared as returned.
  HAlign h_align = HAlign::truth;
  int threads = 0;
};

struct GridCell {
  double epsilon = 0.0;
  double delta = 0.0;
  Method method = Method::chordal;
  double h_rel_err = 0.0;
  double w_rel_err = 0.0;
  /// Chordal objective for chordal, ‖M - WH‖_F for fro_hals.
  double final_obj = 0.0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
};

/// Cells are ordered ε-major, then δ, then method. Cell (i, k) uses seed
/// `seed + i·|deltas| + k` for the shared uniform start of every method.
std::vector<GridCell> grid_sweep(const GridOptions &opts);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);
std::vector<double> default_epsilons();
std::vector<double> default_deltas();

void write_grid_csv(std::ostream &os, const std::vector<GridCell> &cells);
void write_trace_csv(std::ostream &os, const IterationTrace &trace);

}  // namespace chordal
