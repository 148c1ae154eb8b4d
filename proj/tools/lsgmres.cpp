// lsgmres: run one GMRES experiment and write its convergence history.
//
//   lsgmres --problem simoncini --rhs random:42 --method one-sync \
//           --restart 100 --tol 1e-14 --csv hist.csv --json summary.json
//
// Exit codes: 0 converged, 1 usage error, 2 stalled / iteration limit,
// 3 breakdown or cancellation failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lowsync/experiment.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Low-synchronization GMRES experiment harness"};

  std::string matrix, problem, rhs = "random:42", method = "one-sync", precond = "none";
  std::string csv, json, plot;
  lowsync::ExperimentSpec spec;
  spec.solver.restart_m = 30;
  spec.solver.max_restarts = 10;
  spec.solver.rel_tol = 1e-6;
  bool no_diag = false, force_diag = false;

  auto *matrix_opt = app.add_option("--matrix", matrix, "MatrixMarket coordinate file");
  auto *problem_opt = app.add_option(
      "--problem", problem, "Built-in problem: simoncini[:n[,first]] or laplace2d:nx");
  matrix_opt->excludes(problem_opt);
  app.add_option("--rhs", rhs, "random:<seed> or ones-image")->capture_default_str();
  app.add_option("--method", method,
                 "mgs-l1 | cgs1-ghysels | cgs2 | two-sync | one-sync | pipeline2")
      ->capture_default_str();
  app.add_option("--restart", spec.solver.restart_m, "Restart length m")->capture_default_str();
  app.add_option("--max-restarts", spec.solver.max_restarts, "Restart cycles after the first")
      ->capture_default_str();
  app.add_option("--tol", spec.solver.rel_tol, "Relative residual tolerance")
      ->capture_default_str();
  app.add_option("--precond", precond, "none | jacobi")->capture_default_str();
  app.add_option("--breakdown-factor", spec.solver.breakdown_tol_factor,
                 "Scale of the happy-breakdown threshold")
      ->capture_default_str();
  app.add_option("--csv", csv, "Per-iteration history CSV");
  app.add_option("--json", json, "JSON run summary");
  app.add_option("--plot", plot, "gnuplot data file (iter rel_res s_norm)");
  app.add_option("--diag-every", spec.diagnostics_every, "Diagnostics stride")
      ->capture_default_str();
  auto *no_diag_flag = app.add_flag("--no-diag", no_diag, "Disable stability diagnostics");
  app.add_flag("--diag", force_diag, "Force diagnostics on for large problems")
      ->excludes(no_diag_flag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "lsgmres: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (matrix.empty() && problem.empty())
      throw std::invalid_argument("one of --matrix or --problem is required");
    if (!matrix.empty()) {
      spec.problem.kind = lowsync::ProblemSpec::Kind::mtx_file;
      spec.problem.path = matrix;
    } else {
      spec.problem = lowsync::parse_problem(problem);
    }
    spec.rhs = lowsync::parse_rhs(rhs);
    const auto m = lowsync::parse_method(method);
    if (!m) throw std::invalid_argument("unknown method '" + method + "'");
    spec.solver.method = *m;
    const auto p = lowsync::parse_precond(precond);
    if (!p) throw std::invalid_argument("unknown preconditioner '" + precond + "'");
    spec.solver.precond = *p;
    spec.solver.validate();
    if (spec.diagnostics_every == 0) throw std::invalid_argument("--diag-every must be >= 1");
  } catch (const std::invalid_argument &e) {
    std::cerr << "lsgmres: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  if (!csv.empty()) spec.csv_path = csv;
  if (!json.empty()) spec.json_path = json;
  if (!plot.empty()) spec.plot_path = plot;
  if (no_diag) spec.diagnostics = false;
  if (force_diag) spec.diagnostics = true;

  try {
    const auto result = lowsync::run_experiment(spec);
    const auto &h = result.solve.history;
    std::cout << lowsync::to_string(spec.solver.method) << " on " << spec.problem.describe()
              << ": " << lowsync::to_string(h.outcome) << " after " << h.iterations()
              << " iterations, " << result.ledger.size() << " reductions";
    if (!h.records.empty()) std::cout << ", implicit rel res " << h.records.back().implicit_rel_res;
    if (h.final_true_rel_res) std::cout << ", true rel res " << *h.final_true_rel_res;
    if (auto stall = h.stall_iteration()) std::cout << ", ||S|| >= 0.99 at iteration " << *stall;
    std::cout << '\n';
    return result.exit_code;
  } catch (const std::exception &e) {
    std::cerr << "lsgmres: " << e.what() << '\n';
    return 1;
  }
}
