#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chordal/matrix.hpp"
#include "chordal/solvers.hpp"

namespace chordal {

struct FactorPair {
  Matrix W;  // m×r
  Matrix H;  // r×n
};

enum class WSolver { epg, fp, avgrmu };

WSolver parse_w_solver(const std::string &name);
const char *to_string(WSolver s);

struct BcdConfig {
  int rank = 1;
  int outer_iters = 5000;
  int h_inner_iters = 25;
  WSolver w_solver = WSolver::epg;
  /// Iterations of the W solver per outer iteration.
  int w_steps = 1;
  std::uint64_t seed = 0;
  /// Tolerances and stepsize rule shared by the inner solvers; max_iters is
  /// overridden by h_inner_iters / w_steps.
  SolverOptions solver;
  /// Stop once |ΔF| < early_stop_tol between outer iterations. Off by default.
  bool early_stop = false;
  double early_stop_tol = 1e-10;
  /// Worker threads for the column h-solves (0 or 1 = serial). Columns write
  /// disjoint outputs, so results do not depend on the thread count.
  int threads = 0;
  /// Receives one message per recovery event (rank-deficient W, stalls).
  std::function<void(const std::string &)> log;
};

struct TraceRow {
  int iter = 0;
  double chordal_obj = 0.0;
  double fro_resid = 0.0;
  double h_time_s = 0.0;
  double w_time_s = 0.0;
  double max_feas_resid = 0.0;
};

using IterationTrace = std::vector<TraceRow>;

struct Preprocessed {
  Matrix M;
  std::vector<double> scales;
  std::vector<Eigen::Index> kept_columns;
};

/// Drops zero columns and normalizes the rest. Throws PreconditionError on a
/// negative entry and EmptyProblemError if nothing is left.
Preprocessed preprocess(const Matrix &M_raw);

/// W (m×r) and H (r×n) with i.i.d. U[0,1) entries. W is drawn first, row by
/// row, then H; deterministic for a given seed on every platform.
FactorPair init_uniform(Eigen::Index m, Eigen::Index r, Eigen::Index n, std::uint64_t seed);

/// Block coordinate descent on the chordal objective. The trace has one row
/// for the (normalized) start and one per outer iteration; its fro_resid
/// column is ‖M - WH‖_F.
std::pair<FactorPair, IterationTrace> bcd_solve(const Matrix &M, const BcdConfig &cfg,
                                                const FactorPair &init);

/// Frobenius NMF by hierarchical alternating least squares. The start is
/// rescaled by the optimal scalar before the first sweep. The trace has one
/// row for the start and one per sweep; chordal_obj is evaluated against
/// the column-normalized data.
std::pair<FactorPair, IterationTrace> hals_fro_nmf(const Matrix &M_raw, int rank, int iters,
                                                   const FactorPair &init,
                                                   double floor = kDefaultFloor);

/// ‖M - WH‖_F
double fro_residual(const Matrix &M, const Matrix &W, const Matrix &H);

}  // namespace chordal
