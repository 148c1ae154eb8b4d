#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lowsync/gmres.hpp"
#include "lowsync/problems.hpp"
#include "lowsync/reduction_ledger.hpp"

namespace lowsync {

struct ProblemSpec {
  enum class Kind { mtx_file, simoncini, laplace2d };
  Kind kind = Kind::simoncini;
  std::filesystem::path path;
  std::size_t n = 100;
  double first = 1e-8;
  std::size_t nx = 32;

  std::string describe() const;
};

/// "simoncini", "simoncini:n", "simoncini:n,first", "laplace2d:nx".
ProblemSpec parse_problem(std::string_view text);
/// "random:<seed>", "random" (seed 42) or "ones-image".
RhsSpec parse_rhs(std::string_view text);
std::optional<PreconditionerKind> parse_precond(std::string_view text);

struct ExperimentSpec {
  ProblemSpec problem;
  RhsSpec rhs;
  GmresConfig solver;
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> json_path;
  std::optional<std::filesystem::path> plot_path;
  std::size_t diagnostics_every = 1;
  /// Unset: on for n <= 2000, off above.
  std::optional<bool> diagnostics;
};

struct ExperimentResult {
  SolveResult solve;
  ReductionLedger ledger;
  std::size_t n = 0;
  int exit_code = 0;
};

/// 0 converged, 2 stalled/maxiter, 3 breakdown or cancellation failure.
int exit_code_for(Outcome outcome);

CsrMatrix build_problem(const ProblemSpec &problem);

/// Builds the problem, solves, writes the requested outputs.
ExperimentResult run_experiment(const ExperimentSpec &spec);

/// One row per iteration: iter,implicit_rel_res,true_rel_res,s_norm,orth_loss,reductions.
void write_csv(std::ostream &out, const ConvergenceHistory &history);
std::string summary_json(const ExperimentSpec &spec, const ExperimentResult &result);

/// gnuplot-ready columns (iter rel_res s_norm) under a '#' header naming the
/// method and problem. Missing s_norm values are written as NaN.
void emit_plot_data(std::ostream &out, const ConvergenceHistory &history,
                    std::string_view method, std::string_view problem);
void emit_plot_data(const std::filesystem::path &path, const ConvergenceHistory &history,
                    std::string_view method, std::string_view problem);

struct PlotRow {
  std::size_t iter;
  double rel_res;
  double s_norm;
};
std::vector<PlotRow> read_plot_data(std::istream &in);

} // namespace lowsync
