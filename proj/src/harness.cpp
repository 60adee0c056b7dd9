#include "chordal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "chordal/errors.hpp"
#include "chordal/matrix_io.hpp"

namespace chordal {

namespace {

constexpr int kMaxAlignRank = 8;

// Column k scaled to unit norm; a zero column stays zero.
Matrix unit_columns(const Matrix &W) {
  Matrix U = W;
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    const double n = U.col(k).norm();
    if (n > 0.0) U.col(k) /= n;
  }
  return U;
}

GridCell run_cell(const GridOptions &opts, double eps, double delta, Method method,
                  std::uint64_t seed) {
  GridCell cell;
  cell.epsilon = eps;
  cell.delta = delta;
  cell.method = method;
  cell.seed = seed;
  try {
    const SynthInstance inst = synth_generate({eps, delta});
    const Eigen::Index r = inst.W_true.cols();
    const FactorPair init = init_uniform(inst.M.rows(), r, inst.M.cols(), seed);
    Matrix W;
    Matrix H;
    if (method == Method::chordal) {
      const Preprocessed pre = preprocess(inst.M);
      BcdConfig cfg = opts.bcd;
      cfg.rank = static_cast<int>(r);
      cfg.seed = seed;
      cfg.threads = 0;
      auto [factors, trace] = bcd_solve(pre.M, cfg, init);
      W = std::move(factors.W);
      H = std::move(factors.H);
      // undo the column normalization of M
      for (Eigen::Index j = 0; j < H.cols(); ++j) {
        H.col(j) *= pre.scales[static_cast<std::size_t>(j)];
      }
      cell.final_obj = trace.back().chordal_obj;
    } else {
      const int iters = opts.hals_iters >= 0 ? opts.hals_iters : opts.bcd.outer_iters;
      auto [factors, trace] = hals_fro_nmf(inst.M, static_cast<int>(r), iters, init);
      W = std::move(factors.W);
      H = std::move(factors.H);
      cell.final_obj = trace.back().fro_resid;
    }
    const Alignment al = w_alignment(W, inst.W_true);
    cell.w_rel_err = al.error;
    if (opts.h_align == HAlign::truth) {
      Matrix H_aligned(H.rows(), H.cols());
      for (Eigen::Index k = 0; k < r; ++k) {
        const Eigen::Index src = al.perm[static_cast<std::size_t>(k)];
        const double wn = W.col(src).norm();
        const double target = inst.W_true.col(k).norm();
        H_aligned.row(k) = wn > 0.0 ? (H.row(src) * (wn / target)).eval()
                                    : Eigen::RowVectorXd::Zero(H.cols()).eval();
      }
      H = std::move(H_aligned);
    }
    cell.h_rel_err = rel_error(H, inst.H_true);
  } catch (const std::exception &e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cell.ok = false;
    cell.error = e.what();
    cell.h_rel_err = cell.w_rel_err = cell.final_obj = nan;
  }
  return cell;
}

}  // namespace

void SynthSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw PreconditionError("synth: epsilon must lie in (0, 0.5)");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("synth: delta must lie in (0, 1]");
}

SynthInstance synth_generate(const SynthSpec &spec) {
  spec.validate();
  SynthInstance inst;
  inst.W_true = Matrix::Constant(3, 3, 0.1);
  inst.W_true.diagonal().setConstant(0.8);
  inst.H_true = Matrix(3, 6);
  for (Eigen::Index k = 0; k < 3; ++k) {
    Vector col = Vector::Constant(3, spec.epsilon);
    col(k) = 1.0 - spec.epsilon;
    inst.H_true.col(2 * k) = col;
    inst.H_true.col(2 * k + 1) = spec.delta * col;
  }
  inst.M = inst.W_true * inst.H_true;
  return inst;
}

double rel_error(const Matrix &X, const Matrix &X_true) {
  require_same_shape(X, X_true, "rel_error");
  const double d = X_true.norm();
  if (d == 0.0) throw DomainError("rel_error: reference matrix is zero");
  return (X - X_true).norm() / d;
}

Alignment w_alignment(const Matrix &W, const Matrix &W_true) {
  require_same_shape(W, W_true, "w_alignment");
  const Eigen::Index r = W.cols();
  if (r > kMaxAlignRank) throw PreconditionError("w_alignment: rank above 8");
  const Matrix U = unit_columns(W);
  const Matrix T = unit_columns(W_true);
  std::vector<int> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), 0);
  Alignment best;
  best.error = std::numeric_limits<double>::infinity();
  Matrix P(U.rows(), r);
  do {
    for (Eigen::Index k = 0; k < r; ++k) P.col(k) = U.col(perm[static_cast<std::size_t>(k)]);
    const double e = rel_error(P, T);
    if (e < best.error) {
      best.error = e;
      best.perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double w_aligned_error(const Matrix &W, const Matrix &W_true) {
  return w_alignment(W, W_true).error;
}

SidSam sid_sam(const Vector &t, const Vector &r, double floor) {
  if (t.size() != r.size() || t.size() == 0) throw DimensionError("sid_sam: size mismatch");
  if ((t.array() < 0.0).any() || (r.array() < 0.0).any()) {
    throw DomainError("sid_sam: spectra must be nonnegative");
  }
  if (!(floor >= 0.0)) throw DomainError("sid_sam: floor must be nonnegative");
  const double tn = t.norm();
  const double rn = r.norm();
  if (tn == 0.0 || rn == 0.0) throw DomainError("sid_sam: zero spectrum");

  SidSam out;
  Vector p = t / tn;
  Vector q = r / rn;
  if (floor > 0.0) {
    out.floored = (p.array() < floor).any() || (q.array() < floor).any();
    p = p.cwiseMax(floor);
    q = q.cwiseMax(floor);
  }
  double sid = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    // p ln(p/q) + q ln(q/p) = (p - q) ln(p/q)
    if (p(i) == q(i)) continue;
    if (p(i) == 0.0 || q(i) == 0.0) {
      sid = std::numeric_limits<double>::infinity();
      break;
    }
    sid += (p(i) - q(i)) * std::log(p(i) / q(i));
  }
  out.sid = sid;
  out.angle = std::acos(std::clamp(t.dot(r) / (tn * rn), -1.0, 1.0));
  out.value = out.angle == 0.0 ? 0.0 : sid * std::tan(out.angle);
  return out;
}

Method parse_method(const std::string &name) {
  if (name == "chordal") return Method::chordal;
  if (name == "fro_hals") return Method::fro_hals;
  throw ParseError("unknown method '" + name + "' (expected chordal or fro_hals)");
}

const char *to_string(Method m) { return m == Method::chordal ? "chordal" : "fro_hals"; }

HAlign parse_h_align(const std::string &name) {
  if (name == "truth") return HAlign::truth;
  if (name == "none") return HAlign::none;
  throw ParseError("unknown H alignment '" + name + "' (expected truth or none)");
}

std::vector<GridCell> grid_sweep(const GridOptions &opts) {
  if (opts.methods.empty()) return {};
  if (opts.epsilons.empty() || opts.deltas.empty()) {
    throw PreconditionError("grid_sweep: epsilon and delta grids must be non-empty");
  }
  struct Job {
    double eps, delta;
    Method method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < opts.epsilons.size(); ++i) {
    for (std::size_t k = 0; k < opts.deltas.size(); ++k) {
      const std::uint64_t seed = opts.seed + i * opts.deltas.size() + k;
      for (Method m : opts.methods) jobs.push_back({opts.epsilons[i], opts.deltas[k], m, seed});
    }
  }
  std::vector<GridCell> cells(jobs.size());
  auto run = [&](std::size_t idx) {
    const Job &j = jobs[idx];
    cells[idx] = run_cell(opts, j.eps, j.delta, j.method, j.seed);
  };
  if (opts.threads <= 1) {
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) run(idx);
    return cells;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(opts.threads), jobs.size());
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t idx; (idx = next.fetch_add(1)) < jobs.size();) run(idx);
    });
  }
  for (auto &t : pool) t.join();
  return cells;
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi > 0.0)) throw PreconditionError("logspace: invalid range");
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::vector<double> default_epsilons() { return logspace(1e-3, 0.3, 6); }
std::vector<double> default_deltas() { return logspace(1e-3, 1.0, 6); }

void write_grid_csv(std::ostream &os, const std::vector<GridCell> &cells) {
  os << "epsilon,delta,method,h_rel_err,w_rel_err,final_obj,seed\n";
  for (const auto &c : cells) {
    os << format_double(c.epsilon) << ',' << format_double(c.delta) << ',' << to_string(c.method)
       << ',' << format_double(c.h_rel_err) << ',' << format_double(c.w_rel_err) << ','
       << format_double(c.final_obj) << ',' << c.seed << '\n';
  }
}

void write_trace_csv(std::ostream &os, const IterationTrace &trace) {
  os << "iter,chordal_obj,fro_resid,h_time_s,w_time_s,max_feas_resid\n";
  for (const auto &row : trace) {
    os << row.iter << ',' << format_double(row.chordal_obj) << ',' << format_double(row.fro_resid)
       << ',' << format_double(row.h_time_s) << ',' << format_double(row.w_time_s) << ','
       << format_double(row.max_feas_resid) << '\n';
  }
}

}  // namespace chordal
