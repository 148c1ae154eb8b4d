#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lowsync/csr_matrix.hpp"
#include "lowsync/dense_matrix.hpp"
#include "lowsync/diagnostics.hpp"
#include "lowsync/preconditioner.hpp"
#include "lowsync/reduction_ledger.hpp"

namespace lowsync {

/// Orthogonalization scheme driving the Arnoldi process.
enum class GmresMethod {
  mgs_l1,        ///< level-1 MGS, i+1 reductions at iteration i
  cgs1_ghysels,  ///< CGS-1 with the Pythagorean normalization, 1 reduction
  cgs2,          ///< CGS with one reorthogonalization pass, 3 reductions
  two_sync_cgs2, ///< lagged level-2 CGS2, 2 reductions
  one_sync_mgs,  ///< lagged level-2 MGS (compact WY), 1 reduction
  pipeline2,     ///< one_sync_mgs on a depth-2 schedule, 1 reduction
};

std::string_view to_string(GmresMethod method);
/// Accepts the enum spelling and the dashed CLI names (mgs-l1, two-sync, ...).
std::optional<GmresMethod> parse_method(std::string_view name);

struct GmresConfig {
  std::size_t restart_m = 30;
  /// Restart cycles after the first; total cycles = max_restarts + 1.
  std::size_t max_restarts = 0;
  double rel_tol = 1e-6;
  GmresMethod method = GmresMethod::one_sync_mgs;
  PreconditionerKind precond = PreconditionerKind::none;
  double breakdown_tol_factor = 1.0;

  void validate() const;
};

/// Laboratory measurements taken alongside a solve. They never add ledger
/// events.
struct DiagnosticsOptions {
  bool enabled = true;
  /// Evaluate ||S||_2 and ||I - Q^T Q||_2 every `every` iterations.
  std::size_t every = 1;
  /// Form x and its true residual at every iteration (expensive).
  bool true_residual_each_iteration = false;
  /// Keep V and the unrotated Hessenberg of the last cycle.
  bool keep_arnoldi = false;
};

enum class Outcome { converged, stalled_maxiter, breakdown, cancellation_failure };
std::string_view to_string(Outcome outcome);

struct IterationRecord {
  std::size_t iter = 0;
  double implicit_rel_res = 0.0;
  std::optional<double> true_rel_res;
  std::optional<double> s_norm;
  std::optional<double> orth_loss;
  std::size_t reductions = 0;
  /// h_{i+1,i} as used by the solver.
  double subdiagonal = 0.0;
  /// ||w||_2 computed explicitly (diagnostics only; Ghysels normalization check).
  std::optional<double> explicit_subdiagonal;
};

struct ConvergenceHistory {
  std::vector<IterationRecord> records;
  Outcome outcome = Outcome::stalled_maxiter;
  std::size_t restarts = 0;
  /// ||b - A x0||_2, the reference for every relative residual.
  double reference_norm = 0.0;
  std::optional<double> final_true_rel_res;
  /// max/min |diag| of the rotated Hessenberg of the last cycle.
  double kappa_estimate = 0.0;

  std::size_t iterations() const { return records.size(); }
  /// First iteration whose ||S||_2 reached `threshold`.
  std::optional<std::size_t> stall_iteration(double threshold = 0.99) const;
};

/// Arnoldi data of the last cycle, kept for relation checks.
struct ArnoldiSnapshot {
  std::size_t n = 0;
  std::size_t m = 0;          ///< completed Arnoldi steps
  std::vector<double> basis;  ///< n x (m+1) column-major
  DenseMatrix hbar;           ///< (m+1) x m, unrotated

  ColumnBlock columns() const { return {basis.data(), n, m + 1}; }
};

struct SolveResult {
  std::vector<double> x;
  ConvergenceHistory history;
  std::optional<ArnoldiSnapshot> arnoldi;
};

/// Collects the per-iteration stability measurements of a solve; the Arnoldi
/// residual is filled when the snapshot was kept.
StabilityReport stability_report(const SolveResult &result, const CsrMatrix &a,
                                 const Preconditioner *precond = nullptr);

// --- least squares --------------------------------------------------------

struct GivensRotation {
  double c = 1.0;
  double s = 0.0;
};

struct GivensState {
  std::vector<GivensRotation> rotations;
  /// Rotated right-hand side; starts as beta * e_1.
  std::vector<double> g;

  void reset(double beta, std::size_t capacity);
};

/// Applies the stored rotations to `h_col` (entries 0..i+1 of Hessenberg
/// column i), creates rotation i annihilating entry i+1, and updates g.
/// Returns |g[i+1]|, the implicit residual norm.
double givens_update(GivensState &state, std::span<double> h_col, std::size_t i);

/// Back substitution on the leading k x k block of the rotated Hessenberg.
/// Returns nullopt if a diagonal entry is exactly zero.
std::optional<std::vector<double>> solve_least_squares(const GivensState &state,
                                                       const DenseMatrix &h_rotated,
                                                       std::size_t k);

// --- drivers --------------------------------------------------------------

SolveResult gmres_mgs_l1(const CsrMatrix &a, std::span<const double> b,
                         std::span<const double> x0, const GmresConfig &config,
                         ReductionLedger &ledger, const DiagnosticsOptions &diag = {});
SolveResult gmres_one_sync(const CsrMatrix &a, std::span<const double> b,
                           std::span<const double> x0, const GmresConfig &config,
                           ReductionLedger &ledger, const DiagnosticsOptions &diag = {});
SolveResult gmres_cgs2(const CsrMatrix &a, std::span<const double> b,
                       std::span<const double> x0, const GmresConfig &config,
                       ReductionLedger &ledger, const DiagnosticsOptions &diag = {});
SolveResult gmres_two_sync(const CsrMatrix &a, std::span<const double> b,
                           std::span<const double> x0, const GmresConfig &config,
                           ReductionLedger &ledger, const DiagnosticsOptions &diag = {});
SolveResult gmres_cgs1_ghysels(const CsrMatrix &a, std::span<const double> b,
                               std::span<const double> x0, const GmresConfig &config,
                               ReductionLedger &ledger, const DiagnosticsOptions &diag = {});
SolveResult gmres_pipeline2(const CsrMatrix &a, std::span<const double> b,
                            std::span<const double> x0, const GmresConfig &config,
                            ReductionLedger &ledger, const DiagnosticsOptions &diag = {});

/// Dispatches on config.method.
SolveResult solve(const CsrMatrix &a, std::span<const double> b, std::span<const double> x0,
                  const GmresConfig &config, ReductionLedger &ledger,
                  const DiagnosticsOptions &diag = {});

} // namespace lowsync
