#include "lowsync/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lowsync/errors.hpp"
#include "lowsync/gram_schmidt.hpp"
#include "lowsync/kernels.hpp"

namespace lowsync {

std::string_view to_string(GmresMethod method) {
  switch (method) {
  case GmresMethod::mgs_l1: return "mgs_l1";
  case GmresMethod::cgs1_ghysels: return "cgs1_ghysels";
  case GmresMethod::cgs2: return "cgs2";
  case GmresMethod::two_sync_cgs2: return "two_sync_cgs2";
  case GmresMethod::one_sync_mgs: return "one_sync_mgs";
  case GmresMethod::pipeline2: return "pipeline2";
  }
  return "unknown";
}

std::optional<GmresMethod> parse_method(std::string_view name) {
  std::string key(name);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "mgs_l1" || key == "mgs") return GmresMethod::mgs_l1;
  if (key == "cgs1_ghysels" || key == "ghysels") return GmresMethod::cgs1_ghysels;
  if (key == "cgs2") return GmresMethod::cgs2;
  if (key == "two_sync_cgs2" || key == "two_sync") return GmresMethod::two_sync_cgs2;
  if (key == "one_sync_mgs" || key == "one_sync") return GmresMethod::one_sync_mgs;
  if (key == "pipeline2") return GmresMethod::pipeline2;
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
  case Outcome::converged: return "converged";
  case Outcome::stalled_maxiter: return "stalled_maxiter";
  case Outcome::breakdown: return "breakdown";
  case Outcome::cancellation_failure: return "cancellation_failure";
  }
  return "unknown";
}

void GmresConfig::validate() const {
  if (restart_m < 1) throw std::invalid_argument("GmresConfig: restart_m must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("GmresConfig: rel_tol must be > 0");
  if (!(breakdown_tol_factor >= 0.0))
    throw std::invalid_argument("GmresConfig: breakdown_tol_factor must be >= 0");
}

std::optional<std::size_t> ConvergenceHistory::stall_iteration(double threshold) const {
  for (const auto &rec : records)
    if (rec.s_norm && *rec.s_norm >= threshold) return rec.iter;
  return std::nullopt;
}

void GivensState::reset(double beta, std::size_t capacity) {
  rotations.clear();
  rotations.reserve(capacity);
  g.assign(capacity + 1, 0.0);
  g[0] = beta;
}

double givens_update(GivensState &state, std::span<double> h_col, std::size_t i) {
  if (h_col.size() < i + 2) throw DimensionError("givens_update: column needs i+2 entries");
  if (state.rotations.size() != i || state.g.size() < i + 2)
    throw DimensionError("givens_update: rotation count out of step with column index");
  for (std::size_t k = 0; k < i; ++k) {
    const auto [c, s] = state.rotations[k];
    const double top = h_col[k], bottom = h_col[k + 1];
    h_col[k] = c * top + s * bottom;
    h_col[k + 1] = -s * top + c * bottom;
  }
  const double a = h_col[i], b = h_col[i + 1];
  GivensRotation rot;
  if (b == 0.0) {
    rot = {1.0, 0.0};
  } else if (a == 0.0) {
    rot = {0.0, 1.0};
  } else {
    const double r = std::hypot(a, b);
    rot = {a / r, b / r};
  }
  h_col[i] = rot.c * a + rot.s * b;
  h_col[i + 1] = 0.0;
  state.rotations.push_back(rot);
  state.g[i + 1] = -rot.s * state.g[i];
  state.g[i] = rot.c * state.g[i];
  return std::abs(state.g[i + 1]);
}

std::optional<std::vector<double>> solve_least_squares(const GivensState &state,
                                                       const DenseMatrix &h_rotated,
                                                       std::size_t k) {
  if (k > state.rotations.size() || k > h_rotated.cols())
    throw DimensionError("solve_least_squares: k exceeds the factored columns");
  std::vector<double> y(k);
  for (std::size_t ii = k; ii-- > 0;) {
    double sum = state.g[ii];
    for (std::size_t j = ii + 1; j < k; ++j) sum -= h_rotated(ii, j) * y[j];
    if (h_rotated(ii, ii) == 0.0) return std::nullopt;
    y[ii] = sum / h_rotated(ii, ii);
  }
  return y;
}

StabilityReport stability_report(const SolveResult &result, const CsrMatrix &a,
                                 const Preconditioner *precond) {
  StabilityReport report;
  for (const auto &rec : result.history.records) {
    if (rec.s_norm) report.s_norm.push_back(*rec.s_norm);
    if (rec.orth_loss) report.orth_loss.push_back(*rec.orth_loss);
  }
  if (result.arnoldi && result.arnoldi->m > 0) {
    const auto &snap = *result.arnoldi;
    report.arnoldi_residual.push_back(
        arnoldi_residual(a, snap.columns(), snap.hbar, snap.m, precond));
  }
  report.kappa_estimate = result.history.kappa_estimate;
  report.stall_iteration = result.history.stall_iteration();
  return report;
}

namespace {

enum class CycleEnd { converged, exhausted, breakdown, cancellation };
enum class StepStatus { ok, breakdown, cancellation };

constexpr double unit_roundoff = std::numeric_limits<double>::epsilon();

struct SolveContext {
  const CsrMatrix &a;
  Preconditioner precond;
  std::span<const double> b;
  const GmresConfig &config;
  ReductionLedger &ledger;
  const DiagnosticsOptions &diag;
  SolveResult &result;
  std::size_t completed = 0; // global iteration counter
  std::vector<double> scratch;
};

struct Cycle {
  Cycle(std::size_t n, std::size_t m)
      : basis(n, m + 2), h(m + 1, m), h_rotated(m + 1, m) {}

  KrylovBasis basis;
  DenseMatrix h;
  DenseMatrix h_rotated;
  GivensState givens;
  std::size_t first_iter = 0;
};

void residual(SolveContext &ctx, std::span<double> r) {
  spmv(ctx.a, ctx.result.x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = ctx.b[i] - r[i];
}

// x_base + M^{-1} V_k y for the current least-squares solution.
std::optional<std::vector<double>> candidate(SolveContext &ctx, const Cycle &cy, std::size_t k) {
  std::vector<double> x = ctx.result.x;
  if (k == 0) return x;
  auto y = solve_least_squares(cy.givens, cy.h_rotated, k);
  if (!y) return std::nullopt;
  std::vector<double> update(x.size(), 0.0);
  maxpy_inplace(update, cy.basis.leading(k), *y);
  if (ctx.precond.kind() != PreconditionerKind::none) update = ctx.precond.apply(update);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += update[i];
  return x;
}

// Accepts the least-squares solution over k columns, shrinking k past any
// exactly singular trailing block.
void accept(SolveContext &ctx, const Cycle &cy, std::size_t k) {
  for (std::size_t kk = k + 1; kk-- > 0;) {
    if (auto x = candidate(ctx, cy, kk)) {
      ctx.result.x = std::move(*x);
      return;
    }
  }
}

void snapshot(SolveContext &ctx, const Cycle &cy, std::size_t steps, bool last_normalized) {
  if (!ctx.diag.keep_arnoldi) return;
  if (!last_normalized && steps > 0) --steps;
  ArnoldiSnapshot snap;
  snap.n = cy.basis.n();
  snap.m = steps;
  const auto cols = cy.basis.leading(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) {
    const auto c = cols.column(j);
    snap.basis.insert(snap.basis.end(), c.begin(), c.end());
  }
  snap.hbar = DenseMatrix(steps + 1, steps);
  for (std::size_t j = 0; j < steps; ++j)
    for (std::size_t i = 0; i <= j + 1; ++i) snap.hbar(i, j) = cy.h(i, j);
  ctx.result.arnoldi = std::move(snap);
}

void estimate_kappa(SolveContext &ctx, const Cycle &cy, std::size_t k) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = std::abs(cy.h_rotated(i, i));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  ctx.result.history.kappa_estimate = (k == 0 || lo == 0.0) ? 0.0 : hi / lo;
}

// Completes Hessenberg column c (already stored unrotated in cy.h): Givens,
// history record and diagnostics. `normalized` is the number of basis
// columns with unit norm at this point. Returns the relative implicit residual.
double finish_column(SolveContext &ctx, Cycle &cy, std::size_t c, std::size_t normalized,
                     std::optional<double> explicit_subdiagonal = std::nullopt) {
  auto rotated = cy.h_rotated.column(c);
  for (std::size_t i = 0; i < c + 2; ++i) rotated[i] = cy.h(i, c);
  const double res = givens_update(cy.givens, rotated.first(c + 2), c);

  auto &history = ctx.result.history;
  IterationRecord rec;
  rec.iter = cy.first_iter + c + 1;
  rec.implicit_rel_res = res / history.reference_norm;
  rec.reductions = ctx.ledger.count_in_iteration(rec.iter);
  rec.subdiagonal = cy.h(c + 1, c);
  rec.explicit_subdiagonal = explicit_subdiagonal;
  if (ctx.diag.enabled && ctx.diag.every > 0 && rec.iter % ctx.diag.every == 0) {
    const auto q = cy.basis.leading(std::min(normalized, c + 2));
    rec.s_norm = paige_metric(q);
    rec.orth_loss = orthogonality_loss(q);
  }
  if (ctx.diag.enabled && ctx.diag.true_residual_each_iteration) {
    if (auto x = candidate(ctx, cy, c + 1)) {
      std::vector<double> r(x->size());
      spmv(ctx.a, *x, r);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = ctx.b[i] - r[i];
      rec.true_rel_res = local_norm2(r) / history.reference_norm;
    }
  }
  history.records.push_back(rec);
  return rec.implicit_rel_res;
}

bool reached(const SolveContext &ctx, double rel) { return rel <= ctx.config.rel_tol; }

// One extra norm reduction: is the least-squares solution over k columns
// converged in terms of the true residual?
bool confirmed_by_true_residual(SolveContext &ctx, const Cycle &cy, std::size_t k) {
  const auto x = candidate(ctx, cy, k);
  if (!x) return false;
  std::vector<double> r(x->size());
  spmv(ctx.a, *x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = ctx.b[i] - r[i];
  return reached(ctx, norm2(r, ctx.ledger) / ctx.result.history.reference_norm);
}

CycleEnd close_cycle(SolveContext &ctx, Cycle &cy, std::size_t k, CycleEnd end,
                     bool last_normalized) {
  accept(ctx, cy, k);
  estimate_kappa(ctx, cy, k);
  snapshot(ctx, cy, k, last_normalized);
  return end;
}

// CGS-1 step with h_{i+1,i} = sqrt(||z||^2 - ||h||^2): one fused reduction.
StepStatus ghysels_step(const ColumnBlock &q, std::span<double> z, std::span<double> h_col,
                        ReductionLedger &ledger, bool measure,
                        std::optional<double> &explicit_norm) {
  const std::size_t p = q.cols();
  auto [h, znorm] = fused_mdot_norm(q, z, z, ledger);
  double hsq = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    h_col[i] = h[i];
    hsq += h[i] * h[i];
  }
  const double zsq = znorm * znorm;
  const double radicand = zsq - hsq;
  if (radicand == 0.0) {
    h_col[p] = 0.0;
    return StepStatus::breakdown;
  }
  if (radicand < 4.0 * unit_roundoff * zsq) return StepStatus::cancellation;

  const double subdiag = std::sqrt(radicand);
  for (auto &v : h) v = -v;
  maxpy_inplace(z, q, h);
  if (measure) explicit_norm = local_norm2(z);
  scale(z, 1.0 / subdiag);
  h_col[p] = subdiag;
  return StepStatus::ok;
}

CycleEnd standard_cycle(SolveContext &ctx, Cycle &cy) {
  const auto &cfg = ctx.config;
  const std::size_t m = cfg.restart_m;
  auto &v = cy.basis;
  auto &ledger = ctx.ledger;
  v.clear();
  ledger.set_overlap_window(false);
  ledger.set_iteration(ctx.completed);
  cy.first_iter = ctx.completed;

  auto r0 = v.append();
  residual(ctx, r0);
  const double beta = norm2(r0, ledger);
  if (ctx.result.history.reference_norm == 0.0) ctx.result.history.reference_norm = beta;
  if (beta == 0.0) return CycleEnd::converged;
  scale(r0, 1.0 / beta);
  cy.givens.reset(beta, m);

  for (std::size_t i = 0; i < m; ++i) {
    ledger.set_iteration(++ctx.completed);
    auto z = v.append();
    apply_operator(ctx.a, ctx.precond, v.column(i), z, ctx.scratch);

    const auto q = v.leading(i + 1);
    auto h_col = cy.h.column(i).first(i + 2);
    StepStatus status = StepStatus::ok;
    std::optional<double> explicit_norm;
    switch (cfg.method) {
    case GmresMethod::mgs_l1:
    case GmresMethod::cgs2: {
      auto step = cfg.method == GmresMethod::mgs_l1
                      ? mgs_level1(q, z, ledger, cfg.breakdown_tol_factor)
                      : cgs_iterated(q, z, 2, ledger, cfg.breakdown_tol_factor);
      std::copy(step.r.begin(), step.r.end(), h_col.begin());
      h_col[i + 1] = step.r_diag;
      if (step.status == GsStatus::breakdown) status = StepStatus::breakdown;
      break;
    }
    case GmresMethod::cgs1_ghysels:
      status = ghysels_step(q, z, h_col, ledger, ctx.diag.enabled, explicit_norm);
      break;
    default: throw std::logic_error("standard_cycle: lagged method");
    }

    if (status == StepStatus::cancellation) {
      // Either genuine cancellation or an exhausted Krylov space blurred by
      // rounding. Try h = 0 and keep it only if the true residual agrees.
      h_col[i + 1] = 0.0;
      finish_column(ctx, cy, i, i + 1, explicit_norm);
      if (confirmed_by_true_residual(ctx, cy, i + 1))
        return close_cycle(ctx, cy, i + 1, CycleEnd::converged, false);
      ctx.result.history.records.pop_back();
      v.truncate(i + 1);
      return close_cycle(ctx, cy, i, CycleEnd::cancellation, true);
    }
    const double rel = finish_column(ctx, cy, i, status == StepStatus::ok ? i + 2 : i + 1,
                                     explicit_norm);
    if (status == StepStatus::breakdown) {
      return close_cycle(ctx, cy, i + 1,
                         reached(ctx, rel) ? CycleEnd::converged : CycleEnd::breakdown, false);
    }
    if (reached(ctx, rel)) return close_cycle(ctx, cy, i + 1, CycleEnd::converged, true);
  }
  return close_cycle(ctx, cy, m, CycleEnd::exhausted, true);
}

// Lagged-normalization Arnoldi (one_sync, two_sync, pipeline2). Loop step k
// projects column k and normalizes column k-1, which completes Hessenberg
// column k-2. The pipelined schedule runs two such steps before applying the
// deferred Givens rotations of both finished columns.
CycleEnd lagged_cycle(SolveContext &ctx, Cycle &cy, FactorState &state) {
  const auto &cfg = ctx.config;
  const std::size_t m = cfg.restart_m;
  const bool pipelined = cfg.method == GmresMethod::pipeline2;
  auto &v = cy.basis;
  auto &ledger = ctx.ledger;
  v.clear();
  state.reset();
  ledger.set_iteration(ctx.completed);
  cy.first_iter = ctx.completed;

  auto lvl2 = [&](std::size_t j) {
    return state.form == ProjectorForm::cgs2
               ? cgs2_lvl2(v, state, j, ledger, LagScaling::krylov, cfg.breakdown_tol_factor)
               : mgs_lvl2(v, state, j, ledger, LagScaling::krylov, cfg.breakdown_tol_factor);
  };
  auto spmv_next = [&](std::size_t k) {
    auto z = v.append();
    apply_operator(ctx.a, ctx.precond, v.column(k - 1), z, ctx.scratch);
  };

  residual(ctx, v.append());
  v.set_lag(1);
  // Every lagged reduction is issued with the SpMV of the next column in hand.
  ledger.set_overlap_window(true);
  spmv_next(1);
  const auto first = lvl2(1);
  const double beta = first.lagged_norm;
  if (ctx.result.history.reference_norm == 0.0) ctx.result.history.reference_norm = beta;
  if (first.status == GsStatus::breakdown) {
    ledger.set_overlap_window(false);
    return CycleEnd::converged;
  }
  cy.givens.reset(beta, m);

  std::vector<std::size_t> pending;
  for (std::size_t k = 2; k <= m + 1; ++k) {
    ledger.set_iteration(++ctx.completed);
    spmv_next(k);
    const auto step = lvl2(k);
    const bool broke = step.status == GsStatus::breakdown;

    const std::size_t c = k - 2;
    for (std::size_t i = 0; i <= c; ++i) cy.h(i, c) = state.r(i, k - 1);
    cy.h(c + 1, c) = step.lagged_norm;
    pending.push_back(c);

    if (pipelined && pending.size() < 2 && !broke && k < m + 1) continue;
    for (const std::size_t col : pending) {
      const bool last_ok = !(broke && col == c);
      const double rel = finish_column(ctx, cy, col, last_ok ? col + 2 : col + 1);
      if (reached(ctx, rel)) {
        ledger.set_overlap_window(false);
        return close_cycle(ctx, cy, col + 1, CycleEnd::converged, last_ok);
      }
      if (!last_ok) {
        ledger.set_overlap_window(false);
        return close_cycle(ctx, cy, col + 1, CycleEnd::breakdown, false);
      }
    }
    pending.clear();
  }
  ledger.set_overlap_window(false);
  return close_cycle(ctx, cy, m, CycleEnd::exhausted, true);
}

bool is_lagged(GmresMethod method) {
  return method == GmresMethod::one_sync_mgs || method == GmresMethod::two_sync_cgs2 ||
         method == GmresMethod::pipeline2;
}

SolveResult run(const CsrMatrix &a, std::span<const double> b, std::span<const double> x0,
                const GmresConfig &config, ReductionLedger &ledger,
                const DiagnosticsOptions &diag) {
  config.validate();
  const std::size_t n = a.n_rows();
  if (a.n_cols() != n) throw DimensionError("gmres: matrix must be square");
  if (b.size() != n) throw DimensionError("gmres: right-hand side length mismatch");
  if (!x0.empty() && x0.size() != n) throw DimensionError("gmres: initial guess length mismatch");
  require_finite(b, "gmres: right-hand side");

  SolveResult result;
  result.x = x0.empty() ? std::vector<double>(n, 0.0) : std::vector<double>(x0.begin(), x0.end());
  SolveContext ctx{a, Preconditioner::make(config.precond, a), b, config, ledger, diag, result,
                   0, std::vector<double>(n)};

  Cycle cycle(n, config.restart_m);
  FactorState state(config.restart_m + 2, config.method == GmresMethod::two_sync_cgs2
                                              ? ProjectorForm::cgs2
                                              : ProjectorForm::wy);
  auto &history = result.history;
  for (std::size_t c = 0;; ++c) {
    const CycleEnd end = is_lagged(config.method) ? lagged_cycle(ctx, cycle, state)
                                                  : standard_cycle(ctx, cycle);
    if (end == CycleEnd::converged) {
      history.outcome = Outcome::converged;
      break;
    }
    if (end == CycleEnd::breakdown) {
      history.outcome = Outcome::breakdown;
      break;
    }
    if (c >= config.max_restarts) {
      history.outcome =
          end == CycleEnd::cancellation ? Outcome::cancellation_failure : Outcome::stalled_maxiter;
      break;
    }
    ++history.restarts;
  }

  std::vector<double> r(n);
  residual(ctx, r);
  if (history.reference_norm > 0.0) history.final_true_rel_res = local_norm2(r) / history.reference_norm;
  else history.final_true_rel_res = 0.0;
  return result;
}

SolveResult run_as(GmresMethod method, const CsrMatrix &a, std::span<const double> b,
                   std::span<const double> x0, GmresConfig config, ReductionLedger &ledger,
                   const DiagnosticsOptions &diag) {
  config.method = method;
  return run(a, b, x0, config, ledger, diag);
}

} // namespace

SolveResult gmres_mgs_l1(const CsrMatrix &a, std::span<const double> b,
                         std::span<const double> x0, const GmresConfig &config,
                         ReductionLedger &ledger, const DiagnosticsOptions &diag) {
  return run_as(GmresMethod::mgs_l1, a, b, x0, config, ledger, diag);
}

SolveResult gmres_one_sync(const CsrMatrix &a, std::span<const double> b,
                           std::span<const double> x0, const GmresConfig &config,
                           ReductionLedger &ledger, const DiagnosticsOptions &diag) {
  return run_as(GmresMethod::one_sync_mgs, a, b, x0, config, ledger, diag);
}

SolveResult gmres_cgs2(const CsrMatrix &a, std::span<const double> b,
                       std::span<const double> x0, const GmresConfig &config,
                       ReductionLedger &ledger, const DiagnosticsOptions &diag) {
  return run_as(GmresMethod::cgs2, a, b, x0, config, ledger, diag);
}

SolveResult gmres_two_sync(const CsrMatrix &a, std::span<const double> b,
                           std::span<const double> x0, const GmresConfig &config,
                           ReductionLedger &ledger, const DiagnosticsOptions &diag) {
  return run_as(GmresMethod::two_sync_cgs2, a, b, x0, config, ledger, diag);
}

SolveResult gmres_cgs1_ghysels(const CsrMatrix &a, std::span<const double> b,
                               std::span<const double> x0, const GmresConfig &config,
                               ReductionLedger &ledger, const DiagnosticsOptions &diag) {
  return run_as(GmresMethod::cgs1_ghysels, a, b, x0, config, ledger, diag);
}

SolveResult gmres_pipeline2(const CsrMatrix &a, std::span<const double> b,
                            std::span<const double> x0, const GmresConfig &config,
                            ReductionLedger &ledger, const DiagnosticsOptions &diag) {
  return run_as(GmresMethod::pipeline2, a, b, x0, config, ledger, diag);
}

SolveResult solve(const CsrMatrix &a, std::span<const double> b, std::span<const double> x0,
                  const GmresConfig &config, ReductionLedger &ledger,
                  const DiagnosticsOptions &diag) {
  return run(a, b, x0, config, ledger, diag);
}

} // namespace lowsync
