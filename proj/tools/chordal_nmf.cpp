#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chordal/errors.hpp"
#include "chordal/gradients.hpp"
#include "chordal/harness.hpp"
#include "chordal/matrix_io.hpp"
#include "chordal/nmf.hpp"

using namespace chordal;

namespace {

int env_threads() {
  const char *v = std::getenv("CHORDAL_THREADS");
  if (!v || !*v) return 0;
  char *end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw ParseError("CHORDAL_THREADS must be a nonnegative integer");
  return static_cast<int>(n);
}

template <class Fn>
void with_output(const std::string &path, Fn &&fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  fn(out);
}

void write_trace(const std::string &path, const IterationTrace &trace) {
  if (path.empty()) return;
  with_output(path, [&](std::ostream &os) { write_trace_csv(os, trace); });
}

struct FactorizeArgs {
  std::string input;
  int rank = 0;
  std::uint64_t seed = 0;
  int outer_iters = 5000;
  int h_inner = 25;
  std::string w_solver = "epg";
  std::string out_w, out_h, trace;
};

// H for the original columns: zero columns that preprocessing dropped come
// back as zero columns, the others are rescaled by the stored norms so that
// W·H approximates the raw data.
Matrix expand_h(const Matrix &H, const Preprocessed &pre, Eigen::Index n_raw) {
  Matrix full = Matrix::Zero(H.rows(), n_raw);
  for (std::size_t k = 0; k < pre.kept_columns.size(); ++k) {
    full.col(pre.kept_columns[k]) = H.col(static_cast<Eigen::Index>(k)) * pre.scales[k];
  }
  return full;
}

void report_factors(const FactorizeArgs &a, const Matrix &W, const Matrix &H,
                    const IterationTrace &trace) {
  if (!a.out_w.empty()) write_matrix_csv(a.out_w, W);
  if (!a.out_h.empty()) write_matrix_csv(a.out_h, H);
  write_trace(a.trace, trace);
  std::cout << "iterations," << trace.back().iter << '\n'
            << "chordal_obj," << format_double(trace.back().chordal_obj) << '\n'
            << "fro_resid," << format_double(trace.back().fro_resid) << '\n';
}

int run_factorize(const FactorizeArgs &a) {
  const Matrix M_raw = read_matrix_csv(a.input);
  const Preprocessed pre = preprocess(M_raw);
  BcdConfig cfg;
  cfg.rank = a.rank;
  cfg.outer_iters = a.outer_iters;
  cfg.h_inner_iters = a.h_inner;
  cfg.w_solver = parse_w_solver(a.w_solver);
  cfg.seed = a.seed;
  cfg.threads = env_threads();
  cfg.log = [](const std::string &msg) { std::cerr << "note: " << msg << '\n'; };
  const FactorPair init = init_uniform(pre.M.rows(), a.rank, pre.M.cols(), a.seed);
  auto [factors, trace] = bcd_solve(pre.M, cfg, init);
  report_factors(a, factors.W, expand_h(factors.H, pre, M_raw.cols()), trace);
  return 0;
}

int run_hals(const FactorizeArgs &a) {
  const Matrix M = read_matrix_csv(a.input);
  const FactorPair init = init_uniform(M.rows(), a.rank, M.cols(), a.seed);
  auto [factors, trace] = hals_fro_nmf(M, a.rank, a.outer_iters, init);
  report_factors(a, factors.W, factors.H, trace);
  return 0;
}

void add_factorize_flags(CLI::App *cmd, FactorizeArgs &a, bool with_solver) {
  cmd->add_option("--input", a.input, "data matrix CSV")->required();
  cmd->add_option("--rank", a.rank, "factorization rank")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "seed of the uniform start");
  cmd->add_option("--outer-iters", a.outer_iters, "outer iterations")
      ->check(CLI::NonNegativeNumber);
  if (with_solver) {
    cmd->add_option("--h-inner", a.h_inner, "RMU iterations per column and sweep")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--w-solver", a.w_solver, "W-subproblem solver")
        ->check(CLI::IsMember({"epg", "fp", "avgrmu"}));
  }
  cmd->add_option("--out-w", a.out_w, "write W as CSV");
  cmd->add_option("--out-h", a.out_h, "write H as CSV");
  cmd->add_option("--trace", a.trace, "write the iteration trace as CSV");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Nonnegative matrix factorization under the chordal distance"};
  app.require_subcommand(1);

  FactorizeArgs fact;
  auto *factorize = app.add_subcommand("factorize", "chordal NMF by block coordinate descent");
  add_factorize_flags(factorize, fact, true);

  FactorizeArgs hals;
  hals.outer_iters = 5000;
  auto *baseline = app.add_subcommand("baseline-hals", "Frobenius NMF by HALS");
  add_factorize_flags(baseline, hals, false);

  SynthSpec spec;
  std::string synth_out, synth_w, synth_h;
  auto *synth = app.add_subcommand("synth", "generate the synthetic cone instance");
  synth->add_option("--epsilon", spec.epsilon, "perturbation in (0, 0.5)");
  synth->add_option("--delta", spec.delta, "attenuation in (0, 1]");
  synth->add_option("--out", synth_out, "write M as CSV (default stdout)");
  synth->add_option("--out-w", synth_w, "write W_true as CSV");
  synth->add_option("--out-h", synth_h, "write H_true as CSV");

  GridOptions grid;
  grid.bcd.outer_iters = 5000;
  std::vector<std::string> methods{"chordal", "fro_hals"};
  std::string grid_out, w_solver = "epg", h_align = "truth";
  auto *gridcmd = app.add_subcommand("grid", "sweep the synthetic instance over (epsilon, delta)");
  gridcmd->add_option("--epsilons", grid.epsilons, "comma-separated epsilons")->delimiter(',');
  gridcmd->add_option("--deltas", grid.deltas, "comma-separated deltas")->delimiter(',');
  gridcmd->add_option("--methods", methods, "comma-separated methods")->delimiter(',');
  gridcmd->add_option("--seed", grid.seed, "base seed");
  gridcmd->add_option("--outer-iters", grid.bcd.outer_iters, "iterations of both methods")
      ->check(CLI::NonNegativeNumber);
  gridcmd->add_option("--h-inner", grid.bcd.h_inner_iters, "RMU iterations per column")
      ->check(CLI::PositiveNumber);
  gridcmd->add_option("--w-solver", w_solver)->check(CLI::IsMember({"epg", "fp", "avgrmu"}));
  gridcmd->add_option("--h-align", h_align, "H comparison: truth or none")
      ->check(CLI::IsMember({"truth", "none"}));
  gridcmd->add_option("--out", grid_out, "results CSV (default stdout)");

  std::string met_input, met_ref;
  double sid_floor = 1e-12;
  auto *metrics = app.add_subcommand("metrics", "compare a matrix against a reference");
  metrics->add_option("--input", met_input, "estimated matrix CSV")->required();
  metrics->add_option("--reference", met_ref, "reference matrix CSV")->required();
  metrics->add_option("--sid-floor", sid_floor, "floor before logarithms (0 disables)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*factorize) return run_factorize(fact);
    if (*baseline) return run_hals(hals);
    if (*synth) {
      const SynthInstance inst = synth_generate(spec);
      with_output(synth_out, [&](std::ostream &os) { format_matrix_csv(os, inst.M); });
      if (!synth_w.empty()) write_matrix_csv(synth_w, inst.W_true);
      if (!synth_h.empty()) write_matrix_csv(synth_h, inst.H_true);
      return 0;
    }
    if (*gridcmd) {
      if (grid.epsilons.empty()) grid.epsilons = default_epsilons();
      if (grid.deltas.empty()) grid.deltas = default_deltas();
      for (const auto &m : methods) grid.methods.push_back(parse_method(m));
      grid.bcd.w_solver = parse_w_solver(w_solver);
      grid.h_align = parse_h_align(h_align);
      grid.threads = env_threads();
      const auto cells = grid_sweep(grid);
      for (const auto &c : cells) {
        if (!c.ok) {
          std::cerr << "cell (" << c.epsilon << ", " << c.delta << ", " << to_string(c.method)
                    << ") failed: " << c.error << '\n';
        }
      }
      with_output(grid_out, [&](std::ostream &os) { write_grid_csv(os, cells); });
      return 0;
    }
    if (*metrics) {
      const Matrix X = read_matrix_csv(met_input);
      const Matrix R = read_matrix_csv(met_ref);
      require_same_shape(X, R, "metrics");
      std::cout << "metric,value\n";
      std::cout << "rel_error," << format_double(rel_error(X, R)) << '\n';
      if (X.cols() <= 8) {
        std::cout << "w_aligned_error," << format_double(w_aligned_error(X, R)) << '\n';
      }
      double total = 0.0;
      bool floored = false;
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const SidSam s = sid_sam(X.col(j), R.col(j), sid_floor);
        total += s.value;
        floored = floored || s.floored;
      }
      std::cout << "sid_sam_mean," << format_double(total / static_cast<double>(X.cols())) << '\n';
      std::cout << "sid_floored," << (floored ? 1 : 0) << '\n';
      return 0;
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
