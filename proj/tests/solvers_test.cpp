#include "chordal/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "chordal/errors.hpp"
#include "test_util.hpp"

using namespace chordal;
using testutil::rand_matrix;
using testutil::rand_vector;

namespace {

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

bool non_decreasing(const std::vector<double> &v, double slack = 0.0) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] < v[k - 1] - slack) return false;
  }
  return true;
}

struct WProblem {
  Matrix W0;
  std::vector<SpectrahedronShell> shells;
};

WProblem random_w_problem(Eigen::Index m, Eigen::Index n, Eigen::Index r) {
  const Matrix M = normalize_columns(rand_matrix(m, n, 0.01, 1)).matrix;
  const Matrix H = rand_matrix(r, n, 0.01, 1);
  return {rand_matrix(m, r, 0.01, 1), make_shells(M, H)};
}

}  // namespace

TEST(SolverOptions, Validation) {
  SolverOptions o;
  EXPECT_NO_THROW(o.validate());
  o.max_iters = 0;
  EXPECT_THROW(o.validate(), PreconditionError);
  o = SolverOptions{};
  o.floor = 0.0;
  EXPECT_THROW(o.validate(), PreconditionError);
}

TEST(EmuStep, EqualSplitIsIdentity) {
  const Vector x = rand_vector(5), g = rand_vector(5, 0.1, 1);
  EXPECT_EQ(emu_step(x, g, g), x);
}

TEST(EmuStep, Arithmetic) {
  const Vector out = emu_step(vec2(1, 1), vec2(1, 2), vec2(2, 1));
  EXPECT_EQ(out, vec2(2, 0.5));
}

TEST(EmuStep, ClassicalFrobeniusMultiplicativeUpdate) {
  const Matrix M = rand_matrix(4, 3), W = rand_matrix(4, 2, 0.1, 1), H = rand_matrix(2, 3, 0.1, 1);
  // ∇_H ½‖M - WH‖² = WᵀWH - WᵀM
  const Matrix out = emu_step(H, Matrix(W.transpose() * W * H), Matrix(W.transpose() * M));
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 3; ++j) {
      double num = 0.0, den = 0.0;
      for (int i = 0; i < 4; ++i) num += W(i, k) * M(i, j);
      for (int l = 0; l < 2; ++l) {
        double g = 0.0;
        for (int i = 0; i < 4; ++i) g += W(i, k) * W(i, l);
        den += g * H(l, j);
      }
      EXPECT_NEAR(out(k, j), H(k, j) * num / den, 1e-14);
    }
  }
}

TEST(RmuStep, EqualSplitFixedPoint) {
  const Matrix W = rand_matrix(5, 3, 0.1, 1);
  const EllipsoidManifold E = EllipsoidManifold::from_factor(W);
  const Vector x = E.normalize(rand_vector(3, 0.1, 1));
  const Vector g = rand_vector(3, 0.1, 1);
  EXPECT_LE((rmu_step(E, x, {g, g}) - x).norm(), 1e-15);
}

TEST(RmuStep, SphereHandValue) {
  const EllipsoidManifold S(Matrix::Identity(2, 2));
  const Vector out = rmu_step(S, vec2(0.6, 0.8), {vec2(2, 1), vec2(1, 1)});
  // z = (0.3, 0.8), ‖z‖ = √0.73
  EXPECT_NEAR(out(0), 0.3 / std::sqrt(0.73), 1e-15);
  EXPECT_NEAR(out(1), 0.8 / std::sqrt(0.73), 1e-15);
  EXPECT_NEAR(out(0), 0.35112, 1e-5);
  EXPECT_NEAR(out(1), 0.93632, 1e-5);
}

TEST(RmuStep, StallAndPreconditions) {
  const EllipsoidManifold S(Matrix::Identity(2, 2));
  EXPECT_THROW(rmu_step(S, vec2(0.6, 0.8), {vec2(1, 1), vec2(0, 0)}), StallError);
  EXPECT_THROW(rmu_step(S, vec2(-0.6, 0.8), {vec2(1, 1), vec2(1, 1)}), DomainError);
  EXPECT_THROW(rmu_step(S, vec2(1, 1), {vec2(1, 1), vec2(1, 1)}), PreconditionError);
}

TEST(RmuStep, EllipsoidFeasibilitySweep) {
  for (int trial = 0; trial < 100; ++trial) {
    const int r = 2 + trial % 9;
    const Matrix W = rand_matrix(r + 2, r, 0.05, 1);
    const Vector m = rand_vector(r + 2).normalized();
    const EllipsoidManifold E = EllipsoidManifold::from_factor(W);
    const Vector wtm = W.transpose() * m;
    Vector h = E.normalize(rand_vector(r, 0.05, 1));
    for (int k = 0; k < 1000; ++k) {
      h = rmu_step(E, h, h_grad_split(E, wtm, h));
      ASSERT_GE(h.minCoeff(), 0.0);
      ASSERT_LE(std::abs(E.residual(h)), 1e-8);
    }
  }
}

TEST(RmuStep, ShellFeasibilitySweep) {
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 9, r = 1 + trial % 4;
    const SpectrahedronShell S(rand_vector(m), rand_vector(r, 0.05, 1));
    Matrix Z = rand_matrix(m, r, 0.05, 1);
    Z /= S.norm(Z);
    for (int k = 0; k < 1000; ++k) {
      Z = rmu_step(S, Z, w_grad_split_n1(S, Z));
      ASSERT_GE(Z.minCoeff(), 0.0);
      ASSERT_LE(std::abs(S.residual(Z)), 1e-8);
    }
  }
}

TEST(SolveH, AxisOptimum) {
  const Matrix W = Matrix::Identity(3, 3);
  const Vector m = Vector::Unit(3, 1);
  const auto res = solve_h_subproblem(W, m, Vector::Ones(3) / std::sqrt(3.0), SolverOptions{});
  EXPECT_LE(res.report.final_objective, 1e-6);
  EXPECT_LE((res.solution - m).norm(), 1e-12);
}

TEST(SolveH, OptimalStartTerminatesQuickly) {
  const Matrix W = rand_matrix(4, 3, 0.1, 1);
  const Vector h = rand_vector(3, 0.1, 1);
  const Vector m = (W * h).normalized();  // h is optimal for this m
  const auto res = solve_h_subproblem(W, m, h, SolverOptions{});
  EXPECT_LE(res.report.iterations_used, 2);
  EXPECT_LE(res.report.final_objective, 1e-14);
}

TEST(SolveH, RandomInstancesConverge) {
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix W = testutil::relu_gaussian(5, 3);
    Vector m = testutil::relu_gaussian(5, 1).col(0);
    if (m.isZero(0.0)) m(0) = 1.0;
    m.normalize();
    if (W.colPivHouseholderQr().rank() < 3) continue;
    const Vector h0 = rand_vector(3, 0.05, 1);
    const auto res = solve_h_subproblem(W, m, h0, SolverOptions{});
    const auto &rep = res.report;
    EXPECT_LT(rep.iterations_used, 100000) << "trial " << trial;
    EXPECT_EQ(rep.objective_trace.size(), static_cast<std::size_t>(rep.iterations_used) + 1);
    EXPECT_LE(rep.final_objective, rep.objective_trace.front() + 1e-12);
    EXPECT_GE(res.solution.minCoeff(), 0.0);
    EXPECT_LE(rep.feasibility_residual, 1e-8);
  }
}

TEST(SolveH, DataOrthogonalToWReturnsStart) {
  Matrix W = Matrix::Zero(4, 2);
  W(0, 0) = 1.0;
  W(1, 1) = 1.0;
  const Vector m = Vector::Unit(4, 3);
  const auto res = solve_h_subproblem(W, m, Vector::Ones(2), SolverOptions{});
  EXPECT_EQ(res.report.iterations_used, 0);
  EXPECT_NEAR(res.solution(0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(res.report.final_objective, 1.0);
}

TEST(SolveH, RankDeficientWPropagates) {
  EXPECT_THROW(solve_h_subproblem(Matrix::Ones(4, 2), Vector::Ones(4).normalized(),
                                  Vector::Ones(2), SolverOptions{}),
               RankDeficientError);
}

TEST(SolveHEpg, ImprovesAndStaysFeasible) {
  const Matrix W = rand_matrix(6, 3, 0.05, 1);
  const Vector m = rand_vector(6).normalized();
  SolverOptions o;
  o.max_iters = 2000;
  const auto res = solve_h_subproblem_epg(W, m, rand_vector(3, 0.05, 1), o);
  EXPECT_GE(res.solution.minCoeff(), 0.0);
  EXPECT_LE(res.report.feasibility_residual, 1e-12);
  EXPECT_LE(res.report.final_objective, res.report.objective_trace.front() + 1e-15);
  EXPECT_TRUE(non_decreasing(
      [&] {
        std::vector<double> neg;
        for (double v : res.report.objective_trace) neg.push_back(-v);
        return neg;
      }(),
      1e-15));
}

TEST(EpgStepW, Basics) {
  const Matrix W = rand_matrix(3, 2);
  EXPECT_EQ(epg_step_W(W, rand_matrix(3, 2, -1, 1), 0.0), W);
  Matrix G = Matrix::Zero(3, 2);
  G(0, 0) = 10.0;
  const Matrix out = epg_step_W(W, G, 1.0);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(1, 1), W(1, 1));
}

TEST(EpgStepW, BacktrackingDoesNotDecrease) {
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_w_problem(10, 25, 4);
    SolverOptions o;
    o.max_iters = 1;
    const auto res = solve_W_subproblem_epg(p.W0, p.shells, o);
    ASSERT_EQ(res.report.objective_trace.size(), 2u);
    EXPECT_NEAR(res.report.objective_trace[1], w_ratio_sum(res.solution, p.shells), 1e-12);
    EXPECT_GE(res.report.objective_trace[1], res.report.objective_trace[0]);
  }
}

TEST(SolveWEpg, StationaryAtExactFactorization) {
  const Matrix W = rand_matrix(6, 3, 0.1, 1), H = rand_matrix(3, 8, 0.1, 1);
  const Matrix M = normalize_columns(W * H).matrix;
  const auto shells = make_shells(M, H);
  SolverOptions o;
  o.max_iters = 1;
  const auto res = solve_W_subproblem_epg(W, shells, o);
  EXPECT_LE(std::abs(res.report.objective_trace[1] - res.report.objective_trace[0]), 1e-10);
  EXPECT_NEAR(res.report.final_objective, 8.0, 1e-10);
}

TEST(SolveWEpg, MonotoneTraceUnderBacktracking) {
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_w_problem(10, 25, 4);
    SolverOptions o;
    o.max_iters = 300;
    const auto res = solve_W_subproblem_epg(p.W0, p.shells, o);
    EXPECT_TRUE(non_decreasing(res.report.objective_trace));
    EXPECT_GE(res.solution.minCoeff(), 0.0);
  }
}

TEST(SolveWEpg, SingleShellMatchesRmuDirection) {
  const Vector m = rand_vector(5, 0.05, 1).normalized();
  const Vector h = rand_vector(3, 0.1, 1);
  const std::vector<SpectrahedronShell> shells{SpectrahedronShell(m, h)};
  const Matrix W0 = rand_matrix(5, 3, 0.1, 1);
  SolverOptions o;
  o.max_iters = 5000;
  const Matrix We = solve_W_subproblem_epg(W0, shells, o).solution;
  const Matrix Wr = solve_W_avgrmu(W0, shells, o).solution;
  const Vector a = We * h, b = Wr * h;
  EXPECT_GE(a.dot(b) / (a.norm() * b.norm()), 1.0 - 1e-6);
  EXPECT_GE(a.dot(m) / a.norm(), 1.0 - 1e-6);
}

TEST(SolveWEpg, ZeroStartStalls) {
  auto p = random_w_problem(4, 5, 2);
  EXPECT_THROW(solve_W_subproblem_epg(Matrix::Zero(4, 2), p.shells, SolverOptions{}), StallError);
  EXPECT_THROW(solve_W_subproblem_epg(-p.W0, p.shells, SolverOptions{}), DomainError);
}

TEST(SolveWEpg, LiteralSignDescends) {
  auto p = random_w_problem(10, 25, 4);
  SolverOptions o;
  o.max_iters = 20;
  o.epg_literal_sign = true;
  const auto res = solve_W_subproblem_epg(p.W0, p.shells, o);
  const auto &t = res.report.objective_trace;
  for (std::size_t k = 1; k < t.size(); ++k) EXPECT_LE(t[k], t[k - 1]);
  EXPECT_LT(t.back(), t.front());
}

TEST(SolveWEpg, FixedStep) {
  auto p = random_w_problem(10, 25, 4);
  SolverOptions o;
  o.max_iters = 10;
  o.epg_step = EpgStepRule::fixed_step(1e-3);
  const auto res = solve_W_subproblem_epg(p.W0, p.shells, o);
  EXPECT_EQ(res.report.iterations_used, 10);
  EXPECT_GE(res.solution.minCoeff(), 0.0);
}

TEST(SolveWFp, FixedPointAtOptimum) {
  const Matrix W = rand_matrix(6, 3, 0.1, 1), H = rand_matrix(3, 8, 0.1, 1);
  const auto shells = make_shells(normalize_columns(W * H).matrix, H);
  SolverOptions o;
  o.max_iters = 10;
  const auto res = solve_W_subproblem_fp(W, shells, o);
  double parametric = 0.0;
  for (const auto &s : shells) {
    parametric += s.numerator(res.solution) - s.ratio(res.solution) * s.norm(res.solution);
  }
  EXPECT_NEAR(parametric, 0.0, 1e-12);
  EXPECT_LE(res.report.iterations_used, 1);
  EXPECT_NEAR(res.report.final_objective, res.report.objective_trace.front(), 1e-10);
}

TEST(SolveWFp, SingleShellMatchesEpg) {
  const Vector m = rand_vector(5, 0.05, 1).normalized();
  const Vector h = rand_vector(3, 0.1, 1);
  const std::vector<SpectrahedronShell> shells{SpectrahedronShell(m, h)};
  const Matrix W0 = rand_matrix(5, 3, 0.1, 1);
  SolverOptions o;
  o.max_iters = 5000;
  const double fe = solve_W_subproblem_epg(W0, shells, o).report.final_objective;
  const double ff = solve_W_subproblem_fp(W0, shells, o).report.final_objective;
  EXPECT_NEAR(ff, fe, 1e-6);
}

TEST(SolveWFp, ImprovesAndParametersNonDecreasing) {
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_w_problem(10, 25, 4);
    SolverOptions o;
    o.max_iters = 100;
    const auto res = solve_W_subproblem_fp(p.W0, p.shells, o);
    EXPECT_GE(res.report.final_objective, w_ratio_sum(p.W0, p.shells));
    EXPECT_TRUE(non_decreasing(res.report.objective_trace));
    EXPECT_GE(res.solution.minCoeff(), 0.0);
  }
}

TEST(SolveWAvgRmu, SingleShellIsRmuTrajectory) {
  const SpectrahedronShell S(rand_vector(5, 0.05, 1), rand_vector(3, 0.1, 1));
  const Matrix W0 = rand_matrix(5, 3, 0.1, 1);
  Matrix Z = W0 / S.norm(W0);
  for (int k = 0; k < 7; ++k) Z = rmu_step(S, Z, w_grad_split_n1(S, Z));
  SolverOptions o;
  o.max_iters = 7;
  o.step_tol = 0.0;
  const Matrix W = solve_W_avgrmu(W0, {S}, o).solution;
  EXPECT_LE((W - Z).norm(), 1e-12);
}

TEST(SolveWAvgRmu, IdenticalShellsMatchSingle) {
  const SpectrahedronShell S(rand_vector(5, 0.05, 1), rand_vector(3, 0.1, 1));
  const Matrix W0 = rand_matrix(5, 3, 0.1, 1);
  SolverOptions o;
  o.max_iters = 5;
  o.step_tol = 0.0;
  const Matrix one = solve_W_avgrmu(W0, {S}, o).solution;
  const Matrix many = solve_W_avgrmu(W0, {S, S, S, S}, o).solution;
  EXPECT_LE((one - many).norm(), 1e-12);
}

TEST(SolveWAvgRmu, RandomRunIsFeasible) {
  auto p = random_w_problem(10, 25, 4);
  SolverOptions o;
  o.max_iters = 200;
  const auto avg = solve_W_avgrmu(p.W0, p.shells, o);
  const auto epg = solve_W_subproblem_epg(p.W0, p.shells, o);
  EXPECT_GE(avg.solution.minCoeff(), 0.0);
  EXPECT_TRUE(std::isfinite(avg.report.final_objective));
  RecordProperty("avgrmu_ratio_sum", std::to_string(avg.report.final_objective));
  RecordProperty("epg_ratio_sum", std::to_string(epg.report.final_objective));
}

TEST(SolveWAvgRmu, DegenerateShellSkipped) {
  Matrix H = rand_matrix(2, 3, 0.1, 1);
  H.col(1).setZero();
  const auto shells = make_shells(normalize_columns(rand_matrix(4, 3, 0.1, 1)).matrix, H);
  SolverOptions o;
  o.max_iters = 3;
  EXPECT_NO_THROW(solve_W_avgrmu(rand_matrix(4, 2, 0.1, 1), shells, o));
}
