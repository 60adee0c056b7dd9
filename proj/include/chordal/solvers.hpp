#pragma once

#include <cstdint>
#include <vector>

#include "chordal/gradients.hpp"
#include "chordal/manifolds.hpp"
#include "chordal/matrix.hpp"

namespace chordal {

enum class StepRule { fixed, backtracking };

/// Stepsize control for the projected-gradient solvers. With backtracking
/// every iteration restarts from eta and shrinks by beta until an
/// Armijo-style sufficient increase with constant c holds.
struct EpgStepRule {
  StepRule rule = StepRule::backtracking;
  double eta = 1.0;
  double beta = 0.5;
  double c = 1e-4;
  int max_halvings = 30;

  static EpgStepRule fixed_step(double eta) {
    return {StepRule::fixed, eta, 0.5, 1e-4, 30};
  }
};

struct SolverOptions {
  int max_iters = 100000;
  /// Stop once the change of the iterate (2-norm / Frobenius) is at most this.
  double step_tol = 1e-12;
  double floor = kDefaultFloor;
  EpgStepRule epg_step;
  std::uint64_t seed = 0;
  /// Use the update W - η∇F with ∇F the gradient of the maximized ratio sum,
  /// exactly as printed, i.e. descend on the ratio sum. Off by default:
  /// the solvers ascend on the ratio sum.
  bool epg_literal_sign = false;
  /// Projected-gradient steps on the parametric objective per outer FP
  /// iteration.
  int fp_inner_iters = 5;

  /// Throws PreconditionError if max_iters < 1 or floor <= 0.
  void validate() const;
};

struct SolveReport {
  int iterations_used = 0;
  double final_objective = 0.0;
  /// Objective at the start and after every iteration
  /// (size = iterations_used + 1).
  std::vector<double> objective_trace;
  double feasibility_residual = 0.0;
  double wall_time = 0.0;  // seconds
  /// Number of times a stalled multiplicative update was restarted from a
  /// perturbed point.
  int stall_recoveries = 0;
};

template <class T>
struct SolveResult {
  T solution;
  SolveReport report;
};

/// x ⊙ grad_minus ⊘ max(grad_plus, floor).
Vector emu_step(const Vector &x, const Vector &grad_plus, const Vector &grad_minus,
                double floor = kDefaultFloor);
Matrix emu_step(const Matrix &x, const Matrix &grad_plus, const Matrix &grad_minus,
                double floor = kDefaultFloor);

/// Riemannian multiplicative update: z = x ⊙ minus ⊘ plus, returned as
/// z / ‖z‖ in the manifold norm. The result stays nonnegative and on the
/// manifold. Throws StallError when z has no mass left.
Vector rmu_step(const EllipsoidManifold &E, const Vector &x, const GradSplit &split,
                double floor = kDefaultFloor);
Matrix rmu_step(const SpectrahedronShell &S, const Matrix &Z,
                const MatrixGradSplit &split, double floor = kDefaultFloor);

/// h-subproblem min 1 - ⟨m, W h⟩ over h ≥ 0 on the ellipsoid of WᵀW, by RMU.
/// h0 is scaled onto the ellipsoid first. The objective trace holds
/// 1 - ⟨m, W h_k⟩. When Wᵀm = 0 the objective is constant and the scaled h0
/// is returned after zero iterations.
SolveResult<Vector> solve_h_subproblem(const Matrix &W, const Vector &m,
                                       const Vector &h0, const SolverOptions &opts);

/// Same, with the ellipsoid and Wᵀm precomputed; used by the BCD sweep.
SolveResult<Vector> solve_h_subproblem(const EllipsoidManifold &E, const Matrix &W,
                                       const Vector &m, const Vector &wtm,
                                       const Vector &h0, const SolverOptions &opts);

/// Projected-gradient baseline for the h-subproblem: ascent on the cosine
/// ⟨m, Wh⟩/‖Wh‖ followed by [·]₊, each iterate rescaled onto the ellipsoid.
SolveResult<Vector> solve_h_subproblem_epg(const Matrix &W, const Vector &m,
                                           const Vector &h0, const SolverOptions &opts);

/// [W - η·descent_grad]₊
Matrix epg_step_W(const Matrix &W, const Matrix &descent_grad, double eta);

/// Projected gradient on the W-subproblem ratio sum. Objective trace holds
/// the ratio sum Σ_j ⟨B_j, W⟩/‖W h_j‖.
SolveResult<Matrix> solve_W_subproblem_epg(const Matrix &W0,
                                           const std::vector<SpectrahedronShell> &shells,
                                           const SolverOptions &opts);

/// Dinkelbach-style fractional programming with one parameter per ratio:
/// λ_j = ⟨B_j, W⟩/‖W h_j‖ is frozen while fp_inner_iters projected-gradient
/// steps raise Σ_j (⟨B_j, W⟩ - λ_j ‖W h_j‖). An outer iteration whose new
/// ratio sum is lower than the current one is rejected and the solve stops
/// there, so the returned ratio sum never falls below the start.
SolveResult<Matrix> solve_W_subproblem_fp(const Matrix &W0,
                                          const std::vector<SpectrahedronShell> &shells,
                                          const SolverOptions &opts);

/// Consensus averaging of per-shell RMU candidates: each shell renormalizes
/// the common iterate onto itself, takes one RMU step, and the candidates
/// are averaged arithmetically. Degenerate shells sit out the iteration.
SolveResult<Matrix> solve_W_avgrmu(const Matrix &W0,
                                   const std::vector<SpectrahedronShell> &shells,
                                   const SolverOptions &opts);

}  // namespace chordal
