#include "chordal/nmf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "chordal/errors.hpp"
#include "chordal/gradients.hpp"
#include "chordal/manifolds.hpp"

namespace chordal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kUnitColumnTol = 1e-8;

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr int kMaxRankRepairs = 40;

void emit(const BcdConfig &cfg, const std::string &msg) {
  if (cfg.log) cfg.log(msg);
}

// Gram matrix of W as an ellipsoid. A numerically rank-deficient W is moved
// off the singular set by adding a constant to every entry, starting at
// floor·max(W) and growing tenfold per failed attempt.
EllipsoidManifold ellipsoid_with_repair(Matrix &W, const BcdConfig &cfg, int iter) {
  double bump = cfg.solver.floor * std::max(W.maxCoeff(), 1.0);
  for (int attempt = 0;; ++attempt) {
    try {
      return EllipsoidManifold::from_factor(W);
    } catch (const RankDeficientError &) {
      if (attempt == kMaxRankRepairs) throw;
      // A constant shift alone cannot separate duplicated columns.
      W.array() += bump;
      for (Eigen::Index k = 0; k < std::min(W.rows(), W.cols()); ++k) W(k, k) += bump;
      emit(cfg, "iteration " + std::to_string(iter) +
                    ": W rank-deficient, perturbed all entries and the diagonal by " +
                    format_g(bump));
      bump *= 10.0;
    }
  }
}

// Scale every column of H onto the ellipsoid of W, i.e. ‖W h_j‖ = 1. A column
// with W h_j = 0 is restarted from the all-ones vector.
void renormalize_columns(const Matrix &W, Matrix &H, const BcdConfig &cfg, int iter) {
  for (Eigen::Index j = 0; j < H.cols(); ++j) {
    double n = (W * H.col(j)).norm();
    if (!(n >= cfg.solver.floor)) {
      emit(cfg, "iteration " + std::to_string(iter) + ": W h_" + std::to_string(j) +
                    " vanished, column restarted");
      H.col(j).setOnes();
      n = (W * H.col(j)).norm();
      if (!(n > 0.0)) throw DegenerateError("bcd: W annihilates the all-ones column");
    }
    H.col(j) /= n;
  }
}

double max_feasibility(const Matrix &W, const Matrix &H) {
  const Matrix WH = W * H;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < WH.cols(); ++j) {
    worst = std::max(worst, std::abs(WH.col(j).squaredNorm() - 1.0));
  }
  return worst;
}

// Runs body(j) for j in [0, n), split into contiguous blocks over the workers.
template <class Body>
void parallel_columns(Eigen::Index n, int threads, Body &&body) {
  if (threads <= 1 || n < 2) {
    for (Eigen::Index j = 0; j < n; ++j) body(j);
    return;
  }
  const int workers = static_cast<int>(std::min<Eigen::Index>(threads, n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Eigen::Index j = w; j < n; j += workers) body(j);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_bcd_inputs(const Matrix &M, const BcdConfig &cfg, const FactorPair &init) {
  if (M.size() == 0) throw EmptyProblemError("bcd_solve: empty data matrix");
  if (!all_finite(M) || !all_nonnegative(M)) {
    throw DomainError("bcd_solve: data must be finite and nonnegative");
  }
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double n = M.col(j).norm();
    if (n == 0.0) throw ZeroColumnError(static_cast<std::size_t>(j));
    if (std::abs(n - 1.0) > kUnitColumnTol) {
      throw PreconditionError("bcd_solve: data columns must be unit norm (preprocess first)");
    }
  }
  if (cfg.rank < 1 || cfg.rank > std::min(M.rows(), M.cols())) {
    throw PreconditionError("bcd_solve: rank must lie in [1, min(m, n)]");
  }
  if (cfg.outer_iters < 0 || cfg.h_inner_iters < 1 || cfg.w_steps < 1) {
    throw PreconditionError("bcd_solve: iteration counts out of range");
  }
  if (init.W.rows() != M.rows() || init.W.cols() != cfg.rank || init.H.rows() != cfg.rank ||
      init.H.cols() != M.cols()) {
    throw DimensionError("bcd_solve: initial factors do not match data and rank");
  }
  if (!all_nonnegative(init.W) || !all_nonnegative(init.H) || !all_finite(init.W) ||
      !all_finite(init.H)) {
    throw DomainError("bcd_solve: initial factors must be finite and nonnegative");
  }
  cfg.solver.validate();
}

}  // namespace

WSolver parse_w_solver(const std::string &name) {
  if (name == "epg") return WSolver::epg;
  if (name == "fp") return WSolver::fp;
  if (name == "avgrmu") return WSolver::avgrmu;
  throw ParseError("unknown W solver '" + name + "' (expected epg, fp or avgrmu)");
}

const char *to_string(WSolver s) {
  switch (s) {
    case WSolver::epg: return "epg";
    case WSolver::fp: return "fp";
    case WSolver::avgrmu: return "avgrmu";
  }
  return "?";
}

double fro_residual(const Matrix &M, const Matrix &W, const Matrix &H) {
  return (M - W * H).norm();
}

Preprocessed preprocess(const Matrix &M_raw) {
  if (!all_finite(M_raw)) throw DomainError("preprocess: non-finite entry");
  if (!all_nonnegative(M_raw)) throw PreconditionError("preprocess: negative entry");
  Preprocessed out;
  for (Eigen::Index j = 0; j < M_raw.cols(); ++j) {
    if (!M_raw.col(j).isZero(0.0)) out.kept_columns.push_back(j);
  }
  if (out.kept_columns.empty()) throw EmptyProblemError("preprocess: every column is zero");
  Matrix kept(M_raw.rows(), static_cast<Eigen::Index>(out.kept_columns.size()));
  for (std::size_t k = 0; k < out.kept_columns.size(); ++k) {
    kept.col(static_cast<Eigen::Index>(k)) = M_raw.col(out.kept_columns[k]);
  }
  NormalizedColumns nc = normalize_columns(kept);
  out.M = std::move(nc.matrix);
  out.scales = std::move(nc.scales);
  return out;
}

FactorPair init_uniform(Eigen::Index m, Eigen::Index r, Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || r < 1 || n < 1) throw DimensionError("init_uniform: dimensions must be positive");
  std::mt19937_64 gen(seed);
  // 53 random bits into [0, 1); std::uniform_real_distribution is not
  // specified bit-for-bit across standard libraries.
  auto draw = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  FactorPair p{Matrix(m, r), Matrix(r, n)};
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < r; ++k) p.W(i, k) = draw();
  for (Eigen::Index k = 0; k < r; ++k)
    for (Eigen::Index j = 0; j < n; ++j) p.H(k, j) = draw();
  return p;
}

std::pair<FactorPair, IterationTrace> bcd_solve(const Matrix &M, const BcdConfig &cfg,
                                                const FactorPair &init) {
  check_bcd_inputs(M, cfg, init);
  Matrix W = init.W;
  Matrix H = init.H;
  ellipsoid_with_repair(W, cfg, 0);
  renormalize_columns(W, H, cfg, 0);

  IterationTrace trace;
  trace.push_back({0, chordal_objective(M, W, H), fro_residual(M, W, H), 0.0, 0.0,
                   max_feasibility(W, H)});

  SolverOptions h_opts = cfg.solver;
  h_opts.max_iters = cfg.h_inner_iters;
  SolverOptions w_opts = cfg.solver;
  w_opts.max_iters = cfg.w_steps;

  for (int it = 1; it <= cfg.outer_iters; ++it) {
    const auto h_start = Clock::now();
    const EllipsoidManifold E = ellipsoid_with_repair(W, cfg, it);
    renormalize_columns(W, H, cfg, it);
    const Matrix WtM = W.transpose() * M;
    std::vector<int> recoveries(static_cast<std::size_t>(M.cols()), 0);
    parallel_columns(M.cols(), cfg.threads, [&](Eigen::Index j) {
      auto res = solve_h_subproblem(E, W, M.col(j), WtM.col(j), H.col(j), h_opts);
      H.col(j) = res.solution;
      recoveries[static_cast<std::size_t>(j)] = res.report.stall_recoveries;
    });
    for (std::size_t j = 0; j < recoveries.size(); ++j) {
      if (recoveries[j] > 0) {
        emit(cfg, "iteration " + std::to_string(it) + ": column " + std::to_string(j) +
                      " recovered from " + std::to_string(recoveries[j]) + " RMU stall(s)");
      }
    }
    const double h_time = seconds_since(h_start);

    const auto w_start = Clock::now();
    const auto shells = make_shells(M, H);
    switch (cfg.w_solver) {
      case WSolver::epg: W = solve_W_subproblem_epg(W, shells, w_opts).solution; break;
      case WSolver::fp: W = solve_W_subproblem_fp(W, shells, w_opts).solution; break;
      case WSolver::avgrmu: W = solve_W_avgrmu(W, shells, w_opts).solution; break;
    }
    ellipsoid_with_repair(W, cfg, it);
    renormalize_columns(W, H, cfg, it);
    const double w_time = seconds_since(w_start);

    trace.push_back({it, chordal_objective(M, W, H), fro_residual(M, W, H), h_time, w_time,
                     max_feasibility(W, H)});
    if (cfg.early_stop &&
        std::abs(trace[trace.size() - 2].chordal_obj - trace.back().chordal_obj) <
            cfg.early_stop_tol) {
      break;
    }
  }
  return {FactorPair{std::move(W), std::move(H)}, std::move(trace)};
}

std::pair<FactorPair, IterationTrace> hals_fro_nmf(const Matrix &M_raw, int rank, int iters,
                                                   const FactorPair &init, double floor) {
  if (M_raw.size() == 0) throw EmptyProblemError("hals: empty data matrix");
  if (!all_finite(M_raw) || !all_nonnegative(M_raw)) {
    throw PreconditionError("hals: data must be finite and nonnegative");
  }
  if (rank < 1 || iters < 0 || !(floor > 0.0)) throw PreconditionError("hals: invalid arguments");
  if (init.W.rows() != M_raw.rows() || init.W.cols() != rank || init.H.rows() != rank ||
      init.H.cols() != M_raw.cols()) {
    throw DimensionError("hals: initial factors do not match data and rank");
  }
  if (!all_nonnegative(init.W) || !all_nonnegative(init.H)) {
    throw DomainError("hals: initial factors must be nonnegative");
  }
  Matrix W = init.W;
  Matrix H = init.H;
  {
    const Matrix WH = W * H;
    const double nn = WH.squaredNorm();
    if (nn > 0.0) {
      const double alpha = frob_inner(M_raw, WH) / nn;
      if (alpha > 0.0) {
        const double s = std::sqrt(alpha);
        W *= s;
        H *= s;
      }
    }
  }

  IterationTrace trace;
  trace.push_back({0, chordal_objective_lenient(M_raw, W, H), fro_residual(M_raw, W, H), 0.0,
                   0.0, 0.0});
  for (int it = 1; it <= iters; ++it) {
    const auto h_start = Clock::now();
    {
      const Matrix WtM = W.transpose() * M_raw;
      const Matrix WtW = W.transpose() * W;
      for (Eigen::Index k = 0; k < rank; ++k) {
        const double d = std::max(WtW(k, k), floor);
        Eigen::RowVectorXd row = H.row(k) + (WtM.row(k) - WtW.row(k) * H) / d;
        row = row.cwiseMax(0.0);
        if (row.isZero(0.0)) row.setConstant(floor);
        H.row(k) = row;
      }
    }
    const double h_time = seconds_since(h_start);
    const auto w_start = Clock::now();
    {
      const Matrix MHt = M_raw * H.transpose();
      const Matrix HHt = H * H.transpose();
      for (Eigen::Index k = 0; k < rank; ++k) {
        const double d = std::max(HHt(k, k), floor);
        Eigen::VectorXd col = W.col(k) + (MHt.col(k) - W * HHt.col(k)) / d;
        col = col.cwiseMax(0.0);
        if (col.isZero(0.0)) col.setConstant(floor);
        W.col(k) = col;
      }
    }
    const double w_time = seconds_since(w_start);
    trace.push_back({it, chordal_objective_lenient(M_raw, W, H), fro_residual(M_raw, W, H),
                     h_time, w_time, 0.0});
  }
  return {FactorPair{std::move(W), std::move(H)}, std::move(trace)};
}

}  // namespace chordal
