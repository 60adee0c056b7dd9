#include "chordal/solvers.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "chordal/errors.hpp"

namespace chordal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double negativity(const Matrix &W) { return std::max(0.0, -W.minCoeff()); }

// RMU with the stall recovery: when the update wipes out all mass, nudge
// every entry up by floor, return to the manifold, and try once more.
template <class Manifold, class Point, class SplitFn>
Point rmu_with_recovery(const Manifold &manifold, const Point &x, SplitFn &&split_at,
                        double floor, int &recoveries) {
  try {
    return rmu_step(manifold, x, split_at(x), floor);
  } catch (const StallError &) {
    ++recoveries;
    const Point nudged = manifold.normalize((x.array() + floor).matrix());
    return rmu_step(manifold, nudged, split_at(nudged), floor);
  }
}

// Clamp-and-check for the ratio-sum solvers: W must keep every W h_j with
// h_j ≠ 0 away from zero.
bool ratio_sum_defined(const Matrix &W, const std::vector<SpectrahedronShell> &shells,
                       double floor) {
  for (const auto &s : shells) {
    if (s.coefficients().isZero(0.0)) continue;
    if ((W * s.coefficients()).squaredNorm() < floor) return false;
  }
  return true;
}

void require_nonnegative_start(const Matrix &W0, const char *what) {
  if (!all_nonnegative(W0)) {
    throw DomainError(std::string(what) + ": starting point must be nonnegative");
  }
  if (W0.isZero(0.0)) throw StallError(std::string(what) + ": starting point is zero");
}

// One projected-gradient ascent step on `objective` from W along `ascent`.
// Returns false if no step was accepted.
template <class Objective>
bool projected_ascent_step(const Matrix &W, double value, const Matrix &ascent,
                           const EpgStepRule &rule, Objective &&objective,
                           const std::vector<SpectrahedronShell> &shells, double floor,
                           Matrix &next, double &next_value) {
  if (rule.rule == StepRule::fixed) {
    next = epg_step_W(W, -ascent, rule.eta);
    if (next.isZero(0.0)) throw StallError("projected gradient: iterate became zero");
    if (!ratio_sum_defined(next, shells, floor)) {
      throw SingularityError("projected gradient: some W h_j vanished");
    }
    next_value = objective(next);
    return true;
  }
  double eta = rule.eta;
  for (int k = 0; k <= rule.max_halvings; ++k, eta *= rule.beta) {
    Matrix candidate = epg_step_W(W, -ascent, eta);
    if (candidate.isZero(0.0) || !ratio_sum_defined(candidate, shells, floor)) continue;
    const double cand_value = objective(candidate);
    if (cand_value >= value + rule.c * frob_inner(ascent, candidate - W)) {
      next = std::move(candidate);
      next_value = cand_value;
      return true;
    }
  }
  return false;
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iters < 1) throw PreconditionError("SolverOptions: max_iters must be >= 1");
  if (!(floor > 0.0)) throw PreconditionError("SolverOptions: floor must be positive");
  if (step_tol < 0.0) throw PreconditionError("SolverOptions: step_tol must be >= 0");
  if (fp_inner_iters < 1) throw PreconditionError("SolverOptions: fp_inner_iters must be >= 1");
  if (!(epg_step.eta >= 0.0) || !(epg_step.beta > 0.0 && epg_step.beta < 1.0)) {
    throw PreconditionError("SolverOptions: invalid stepsize rule");
  }
}

Vector emu_step(const Vector &x, const Vector &grad_plus, const Vector &grad_minus,
                double floor) {
  return mul_div_floor(x, grad_minus, grad_plus, floor);
}

Matrix emu_step(const Matrix &x, const Matrix &grad_plus, const Matrix &grad_minus,
                double floor) {
  return mul_div_floor(x, grad_minus, grad_plus, floor);
}

Vector rmu_step(const EllipsoidManifold &E, const Vector &x, const GradSplit &split,
                double floor) {
  if ((x.array() < 0.0).any()) throw DomainError("rmu_step: iterate must be nonnegative");
  E.require_on_manifold(x, "rmu_step");
  const Vector z = mul_div_floor(x, split.minus, split.plus, floor);
  const double n = E.norm(z);
  if (!(n >= floor) || !std::isfinite(n)) throw StallError("rmu_step: update annihilated the iterate");
  return z / n;
}

Matrix rmu_step(const SpectrahedronShell &S, const Matrix &Z, const MatrixGradSplit &split,
                double floor) {
  if (!all_nonnegative(Z)) throw DomainError("rmu_step: iterate must be nonnegative");
  S.require_on_manifold(Z, "rmu_step");
  const Matrix z = mul_div_floor(Z, split.minus, split.plus, floor);
  const double n = S.norm(z);
  if (!(n >= floor) || !std::isfinite(n)) throw StallError("rmu_step: update annihilated the iterate");
  return z / n;
}

SolveResult<Vector> solve_h_subproblem(const Matrix &W, const Vector &m, const Vector &h0,
                                       const SolverOptions &opts) {
  if (W.rows() != m.size()) throw DimensionError("solve_h_subproblem: rows(W) != dim(m)");
  const EllipsoidManifold E = EllipsoidManifold::from_factor(W);
  return solve_h_subproblem(E, W, m, W.transpose() * m, h0, opts);
}

SolveResult<Vector> solve_h_subproblem(const EllipsoidManifold &E, const Matrix &W,
                                       const Vector &m, const Vector &wtm,
                                       const Vector &h0, const SolverOptions &opts) {
  opts.validate();
  const auto start = Clock::now();
  if (h0.size() != E.dim() || wtm.size() != E.dim() || W.cols() != E.dim()) {
    throw DimensionError("solve_h_subproblem: dimension mismatch");
  }
  if ((h0.array() < 0.0).any()) throw DomainError("solve_h_subproblem: h0 must be nonnegative");

  SolveResult<Vector> out;
  auto &report = out.report;
  Vector h = E.normalize(h0, opts.floor);
  const double m_norm_sq = m.squaredNorm();
  auto phi = [&](const Vector &v) { return m_norm_sq == 0.0 ? 1.0 : 1.0 - wtm.dot(v); };
  auto split_at = [&](const Vector &v) { return h_grad_split(E, wtm, v); };

  report.objective_trace.push_back(phi(h));
  // m orthogonal to every column of W: φ is constant, h0 is already optimal
  const bool flat = wtm.isZero(0.0);
  for (int it = 1; !flat && it <= opts.max_iters; ++it) {
    Vector next = rmu_with_recovery(E, h, split_at, opts.floor, report.stall_recoveries);
    const double step = (next - h).norm();
    h = std::move(next);
    report.objective_trace.push_back(phi(h));
    report.iterations_used = it;
    if (step <= opts.step_tol) break;
  }
  report.final_objective = report.objective_trace.back();
  report.feasibility_residual = std::abs(E.residual(h));
  report.wall_time = seconds_since(start);
  out.solution = std::move(h);
  return out;
}

SolveResult<Vector> solve_h_subproblem_epg(const Matrix &W, const Vector &m,
                                           const Vector &h0, const SolverOptions &opts) {
  opts.validate();
  const auto start = Clock::now();
  if (W.rows() != m.size() || W.cols() != h0.size()) {
    throw DimensionError("solve_h_subproblem_epg: dimension mismatch");
  }
  if ((h0.array() < 0.0).any()) throw DomainError("solve_h_subproblem_epg: h0 must be nonnegative");
  const EllipsoidManifold E = EllipsoidManifold::from_factor(W);
  const Vector zero_m = Vector::Zero(m.size());
  const Vector wtm = W.transpose() * m;

  auto cosine = [&](const Vector &v) { return quotient_value(W, zero_m, m, W, zero_m, v); };
  auto phi = [&](const Vector &v) { return 1.0 - wtm.dot(v); };  // v on the ellipsoid

  SolveResult<Vector> out;
  auto &report = out.report;
  Vector h = E.normalize(h0, opts.floor);
  double value = cosine(h);
  report.objective_trace.push_back(phi(h));
  const EpgStepRule &rule = opts.epg_step;

  for (int it = 1; it <= opts.max_iters; ++it) {
    const Vector g = quotient_grad(W, zero_m, m, W, zero_m, h, opts.floor);
    Vector next;
    double next_value = 0.0;
    bool accepted = false;
    double eta = rule.eta;
    const int tries = rule.rule == StepRule::fixed ? 1 : rule.max_halvings + 1;
    for (int k = 0; k < tries; ++k, eta *= rule.beta) {
      const Vector raw = (h + eta * g).cwiseMax(0.0);
      if (E.norm(raw) < opts.floor) continue;
      const double raw_value = cosine(raw);
      if (rule.rule == StepRule::fixed ||
          raw_value >= value + rule.c * g.dot(raw - h)) {
        next = E.normalize(raw, opts.floor);
        next_value = raw_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double step = (next - h).norm();
    h = std::move(next);
    value = next_value;
    report.objective_trace.push_back(phi(h));
    report.iterations_used = it;
    if (step <= opts.step_tol) break;
  }
  report.final_objective = report.objective_trace.back();
  report.feasibility_residual = std::abs(E.residual(h));
  report.wall_time = seconds_since(start);
  out.solution = std::move(h);
  return out;
}

Matrix epg_step_W(const Matrix &W, const Matrix &descent_grad, double eta) {
  require_same_shape(W, descent_grad, "epg_step_W");
  if (eta == 0.0) return W;
  return (W - eta * descent_grad).cwiseMax(0.0);
}

SolveResult<Matrix> solve_W_subproblem_epg(const Matrix &W0,
                                           const std::vector<SpectrahedronShell> &shells,
                                           const SolverOptions &opts) {
  opts.validate();
  const auto start = Clock::now();
  require_nonnegative_start(W0, "solve_W_subproblem_epg");

  // The literal update descends on the ratio sum; expressed as ascent on its
  // negation the same line search serves both conventions.
  const double sign = opts.epg_literal_sign ? -1.0 : 1.0;
  auto objective = [&](const Matrix &W) { return sign * w_ratio_sum(W, shells); };

  SolveResult<Matrix> out;
  auto &report = out.report;
  Matrix W = W0;
  double value = objective(W);
  report.objective_trace.push_back(sign * value);

  for (int it = 1; it <= opts.max_iters; ++it) {
    const Matrix ascent = sign * w_euclidean_grad(W, shells, opts.floor);
    Matrix next;
    double next_value = 0.0;
    if (!projected_ascent_step(W, value, ascent, opts.epg_step, objective, shells,
                               opts.floor, next, next_value)) {
      break;
    }
    const double step = (next - W).norm();
    W = std::move(next);
    value = next_value;
    report.objective_trace.push_back(sign * value);
    report.iterations_used = it;
    if (step <= opts.step_tol) break;
  }
  report.final_objective = report.objective_trace.back();
  report.feasibility_residual = negativity(W);
  report.wall_time = seconds_since(start);
  out.solution = std::move(W);
  return out;
}

SolveResult<Matrix> solve_W_subproblem_fp(const Matrix &W0,
                                          const std::vector<SpectrahedronShell> &shells,
                                          const SolverOptions &opts) {
  opts.validate();
  const auto start = Clock::now();
  require_nonnegative_start(W0, "solve_W_subproblem_fp");
  if (!ratio_sum_defined(W0, shells, opts.floor)) {
    throw SingularityError("solve_W_subproblem_fp: some W h_j vanishes at the start");
  }

  auto ratios = [&](const Matrix &W) {
    std::vector<double> lam(shells.size(), 0.0);
    for (std::size_t j = 0; j < shells.size(); ++j) {
      if (!shells[j].coefficients().isZero(0.0)) lam[j] = shells[j].ratio(W);
    }
    return lam;
  };
  auto sum = [](const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };

  SolveResult<Matrix> out;
  auto &report = out.report;
  Matrix W = W0;
  const double scale = W0.norm();
  std::vector<double> lambda = ratios(W);
  double ratio_sum = sum(lambda);
  report.objective_trace.push_back(ratio_sum);

  for (int outer = 1; outer <= opts.max_iters; ++outer) {
    // Parametric objective Σ_j ⟨B_j, W⟩ - λ_j ‖W h_j‖ and its gradient
    // Σ_j (m_j - λ_j W h_j/‖W h_j‖) h_jᵀ.
    auto parametric = [&](const Matrix &V) {
      double p = 0.0;
      for (std::size_t j = 0; j < shells.size(); ++j) {
        const auto &s = shells[j];
        if (s.coefficients().isZero(0.0)) continue;
        const Vector vh = V * s.coefficients();
        p += s.data_column().dot(vh) - lambda[j] * vh.norm();
      }
      return p;
    };
    Matrix inner = W;
    double pvalue = parametric(inner);
    for (int t = 0; t < opts.fp_inner_iters; ++t) {
      Matrix grad = Matrix::Zero(W.rows(), W.cols());
      for (std::size_t j = 0; j < shells.size(); ++j) {
        const auto &s = shells[j];
        const Vector &h = s.coefficients();
        if (h.isZero(0.0)) continue;
        const Vector vh = inner * h;
        const double d = vh.norm();
        if (d * d < opts.floor) throw SingularityError("solve_W_subproblem_fp: W h_j vanishes", j);
        grad.noalias() += (s.data_column() - (lambda[j] / d) * vh) * h.transpose();
      }
      Matrix next;
      double next_value = 0.0;
      if (!projected_ascent_step(inner, pvalue, grad, opts.epg_step, parametric, shells,
                                 opts.floor, next, next_value)) {
        break;
      }
      inner = std::move(next);
      pvalue = next_value;
    }
    // The ratios are scale invariant; pin the scale so the homogeneous
    // parametric objective cannot drift W towards zero or infinity.
    const double inner_norm = inner.norm();
    if (inner_norm > 0.0) inner *= scale / inner_norm;

    std::vector<double> next_lambda = ratios(inner);
    const double next_sum = sum(next_lambda);
    if (next_sum < ratio_sum) break;
    double delta = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      delta = std::max(delta, std::abs(next_lambda[j] - lambda[j]));
    }
    W = std::move(inner);
    lambda = std::move(next_lambda);
    ratio_sum = next_sum;
    report.objective_trace.push_back(ratio_sum);
    report.iterations_used = outer;
    if (delta <= opts.step_tol) break;
  }
  report.final_objective = report.objective_trace.back();
  report.feasibility_residual = negativity(W);
  report.wall_time = seconds_since(start);
  out.solution = std::move(W);
  return out;
}

SolveResult<Matrix> solve_W_avgrmu(const Matrix &W0,
                                   const std::vector<SpectrahedronShell> &shells,
                                   const SolverOptions &opts) {
  opts.validate();
  const auto start = Clock::now();
  require_nonnegative_start(W0, "solve_W_avgrmu");

  SolveResult<Matrix> out;
  auto &report = out.report;
  Matrix W = W0;
  report.objective_trace.push_back(w_ratio_sum(W, shells));

  for (int it = 1; it <= opts.max_iters; ++it) {
    Matrix acc = Matrix::Zero(W.rows(), W.cols());
    int used = 0;
    for (const auto &s : shells) {
      if (s.coefficients().isZero(0.0)) continue;
      const double n = s.norm(W);
      if (!(n >= opts.floor)) continue;
      try {
        const Matrix Z = W / n;
        auto split_at = [&](const Matrix &V) { return w_grad_split_n1(s, V); };
        acc += rmu_with_recovery(s, Z, split_at, opts.floor, report.stall_recoveries);
        ++used;
      } catch (const NumericalError &) {
        // shell sits out this iteration
      }
    }
    if (used == 0) throw StallError("solve_W_avgrmu: every shell is degenerate");
    Matrix next = acc / static_cast<double>(used);
    const double step = (next - W).norm();
    W = std::move(next);
    report.objective_trace.push_back(w_ratio_sum(W, shells));
    report.iterations_used = it;
    if (step <= opts.step_tol) break;
  }
  report.final_objective = report.objective_trace.back();
  report.feasibility_residual = negativity(W);
  report.wall_time = seconds_since(start);
  out.solution = std::move(W);
  return out;
}

}  // namespace chordal
