#include "lowsync/gram_schmidt.hpp"

#include <cmath>
#include <limits>

#include "lowsync/errors.hpp"
#include "lowsync/kernels.hpp"

namespace lowsync {
namespace {

constexpr double unit_roundoff = 0x1p-52;

double coefficient_norm(std::span<const double> r) {
  double sum = 0.0;
  for (double v : r) sum += v * v;
  return std::sqrt(sum);
}

void check_lagged_entry(const KrylovBasis &v, const FactorState &state, std::size_t j) {
  if (j == 0) throw DimensionError("level-2 Gram-Schmidt needs a lagged column (j >= 1)");
  if (v.n_cols() != j + 1) throw DimensionError("level-2 Gram-Schmidt: basis must hold j+1 columns");
  if (state.active + 1 != j)
    throw DimensionError("level-2 Gram-Schmidt: factor state out of step with basis");
  if (j + 1 > state.r.cols()) throw DimensionError("level-2 Gram-Schmidt: factor capacity exhausted");
}

// Shared first synchronization of the lagged kernels: batches
// [Q_{0:j-2}^T w, Q_{0:j-1}^T q_j] with ||w||, where w is the lagged column.
struct LaggedReduction {
  std::vector<double> lagged_inner; // Q_{0:j-2}^T w
  std::vector<double> new_inner;    // Q_{0:j-1}^T q_j (entry j-1 against un-normalized w)
  double lagged_norm;
};

LaggedReduction first_reduction(const KrylovBasis &v, std::size_t j, ReductionLedger &ledger) {
  const MdotTerm terms[] = {{v.leading(j - 1), v.column(j - 1)}, {v.leading(j), v.column(j)}};
  auto fused = fused_reduction(terms, v.column(j - 1), ledger);
  return {std::move(fused.products[0]), std::move(fused.products[1]), fused.norm};
}

// Normalizes the lagged column and rescales the freshly reduced coefficients
// so they refer to the normalized basis. Returns the coefficient vector for q_j.
std::vector<double> normalize_lagged(KrylovBasis &v, FactorState &state, std::size_t j,
                                     LaggedReduction &red, LagScaling scaling) {
  const double rho = red.lagged_norm;
  const double inv = 1.0 / rho;
  scale(v.column(j - 1), inv);
  state.r(j - 1, j - 1) = rho;
  for (std::size_t i = 0; i + 1 < j; ++i) state.l(j - 1, i) = red.lagged_inner[i] * inv;

  std::vector<double> coeffs = std::move(red.new_inner);
  coeffs[j - 1] *= inv;
  if (scaling == LagScaling::krylov) {
    scale(v.column(j), inv);
    scale(coeffs, inv);
  }
  state.active = j;
  return coeffs;
}

} // namespace

FactorState::FactorState(std::size_t capacity, ProjectorForm form_)
    : form(form_), r(capacity, capacity), t(DenseMatrix::identity(capacity)),
      l(capacity, capacity) {}

void FactorState::reset() {
  r.fill(0.0);
  t = DenseMatrix::identity(t.rows());
  l.fill(0.0);
  active = 0;
  lag_coefficient_norm = 0.0;
}

bool is_breakdown(double r_diag, double coefficient_norm, std::size_t n, double factor) {
  if (!(r_diag > 0.0)) return true;
  const double before = std::hypot(coefficient_norm, r_diag);
  return r_diag <= factor * unit_roundoff * std::sqrt(static_cast<double>(n)) * before;
}

GsStep cgs_iterated(const ColumnBlock &q, std::span<double> a, int passes,
                    ReductionLedger &ledger, double breakdown_factor) {
  if (passes < 1) throw std::invalid_argument("cgs_iterated: passes must be >= 1");
  if (a.size() != q.rows()) throw DimensionError("cgs_iterated: length mismatch");
  GsStep step;
  step.r.assign(q.cols(), 0.0);
  for (int k = 0; k < passes && q.cols() > 0; ++k) {
    auto s = mass_inner_product(q, a, ledger);
    for (std::size_t i = 0; i < s.size(); ++i) {
      step.r[i] += s[i];
      s[i] = -s[i];
    }
    maxpy_inplace(a, q, s);
  }
  step.r_diag = norm2(a, ledger);
  if (is_breakdown(step.r_diag, coefficient_norm(step.r), a.size(), breakdown_factor)) {
    step.status = GsStatus::breakdown;
    return step;
  }
  scale(a, 1.0 / step.r_diag);
  return step;
}

GsStep mgs_level1(const ColumnBlock &q, std::span<double> a, ReductionLedger &ledger,
                  double breakdown_factor) {
  if (a.size() != q.rows()) throw DimensionError("mgs_level1: length mismatch");
  GsStep step;
  step.r.assign(q.cols(), 0.0);
  for (std::size_t i = 0; i < q.cols(); ++i) {
    const auto qi = q.column(i);
    step.r[i] = dot(qi, a, ledger);
    axpy(-step.r[i], qi, a);
  }
  step.r_diag = norm2(a, ledger);
  if (is_breakdown(step.r_diag, coefficient_norm(step.r), a.size(), breakdown_factor)) {
    step.status = GsStatus::breakdown;
    return step;
  }
  scale(a, 1.0 / step.r_diag);
  return step;
}

GsStep cgs2_two_sync(const ColumnBlock &q, FactorState &state, std::span<double> a,
                     ReductionLedger &ledger, double breakdown_factor) {
  if (state.form != ProjectorForm::cgs2)
    throw std::invalid_argument("cgs2_two_sync: factor state must use the cgs2 form");
  if (a.size() != q.rows()) throw DimensionError("cgs2_two_sync: length mismatch");
  const std::size_t p = q.cols();
  if (state.active != p) throw DimensionError("cgs2_two_sync: factor state out of step with Q");
  if (p + 1 > state.r.cols()) throw DimensionError("cgs2_two_sync: factor capacity exhausted");

  GsStep step;
  std::vector<double> y;
  if (p > 0) {
    // [y, L^T_{:,p}] = Q^T [a, q_p]
    const MdotTerm terms[] = {{q, a}, {q.leading(p - 1), q.column(p - 1)}};
    auto fused = fused_reduction(terms, {}, ledger);
    y = std::move(fused.products[0]);
    for (std::size_t i = 0; i + 1 < p; ++i) state.l(p - 1, i) = fused.products[1][i];
    step.r = apply_t(state, y, false);
    std::vector<double> neg(step.r.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -step.r[i];
    maxpy_inplace(a, q, neg);
  }
  step.r_diag = norm2(a, ledger);
  for (std::size_t i = 0; i < p; ++i) state.r(i, p) = step.r[i];
  state.r(p, p) = step.r_diag;
  if (is_breakdown(step.r_diag, coefficient_norm(step.r), a.size(), breakdown_factor)) {
    step.status = GsStatus::breakdown;
    return step;
  }
  scale(a, 1.0 / step.r_diag);
  state.active = p + 1;
  return step;
}

LaggedStep mgs_lvl2(KrylovBasis &v, FactorState &state, std::size_t j, ReductionLedger &ledger,
                    LagScaling scaling, double breakdown_factor) {
  if (state.form != ProjectorForm::wy)
    throw std::invalid_argument("mgs_lvl2: factor state must use the wy form");
  check_lagged_entry(v, state, j);

  auto red = first_reduction(v, j, ledger);
  LaggedStep out{red.lagged_norm, GsStatus::ok};
  if (is_breakdown(red.lagged_norm, state.lag_coefficient_norm, v.n(), breakdown_factor)) {
    state.r(j - 1, j - 1) = red.lagged_norm;
    out.status = GsStatus::breakdown;
    return out;
  }
  auto coeffs = normalize_lagged(v, state, j, red, scaling);

  // T(0:j-2, j-1) = -T(0:j-2, 0:j-2) * (Q_{0:j-2}^T q_{j-1})
  const std::size_t c = j - 1;
  for (std::size_t i = 0; i < c; ++i) {
    double sum = 0.0;
    for (std::size_t k = i; k < c; ++k) sum += state.t(i, k) * state.l(c, k);
    state.t(i, c) = -sum;
  }
  state.t(c, c) = 1.0;

  // R(0:j-1, j) = T^T Q^T q_j, then q_j -= Q R(0:j-1, j)
  auto r = apply_t(state, coeffs, true);
  std::vector<double> neg(r.size());
  for (std::size_t i = 0; i < j; ++i) {
    state.r(i, j) = r[i];
    neg[i] = -r[i];
  }
  maxpy_inplace(v.column(j), v.leading(j), neg);
  state.lag_coefficient_norm = coefficient_norm(r);
  v.set_lag(1);
  return out;
}

LaggedStep cgs2_lvl2(KrylovBasis &v, FactorState &state, std::size_t j, ReductionLedger &ledger,
                     LagScaling scaling, double breakdown_factor) {
  if (state.form != ProjectorForm::cgs2)
    throw std::invalid_argument("cgs2_lvl2: factor state must use the cgs2 form");
  check_lagged_entry(v, state, j);

  auto red = first_reduction(v, j, ledger);
  LaggedStep out{red.lagged_norm, GsStatus::ok};
  if (is_breakdown(red.lagged_norm, state.lag_coefficient_norm, v.n(), breakdown_factor)) {
    state.r(j - 1, j - 1) = red.lagged_norm;
    out.status = GsStatus::breakdown;
    return out;
  }
  auto coeffs = normalize_lagged(v, state, j, red, scaling);

  // First pass with the Gram correction r = (I - L - L^T) Q^T q_j.
  auto r = apply_t(state, coeffs, false);
  const auto q = v.leading(j);
  auto qj = v.column(j);
  std::vector<double> neg(j);
  for (std::size_t i = 0; i < j; ++i) neg[i] = -r[i];
  maxpy_inplace(qj, q, neg);

  // Second synchronization: reorthogonalize.
  auto s = mass_inner_product(q, qj, ledger);
  for (std::size_t i = 0; i < j; ++i) {
    r[i] += s[i];
    s[i] = -s[i];
  }
  maxpy_inplace(qj, q, s);

  for (std::size_t i = 0; i < j; ++i) state.r(i, j) = r[i];
  state.lag_coefficient_norm = coefficient_norm(r);
  v.set_lag(1);
  return out;
}

LaggedStep finalize_lag(KrylovBasis &v, FactorState &state, ReductionLedger &ledger,
                        double breakdown_factor) {
  if (v.n_cols() == 0 || state.active + 1 != v.n_cols())
    throw DimensionError("finalize_lag: no lagged column to normalize");
  const std::size_t c = v.n_cols() - 1;
  auto col = v.column(c);
  LaggedStep out{norm2(col, ledger), GsStatus::ok};
  state.r(c, c) = out.lagged_norm;
  if (is_breakdown(out.lagged_norm, state.lag_coefficient_norm, v.n(), breakdown_factor)) {
    out.status = GsStatus::breakdown;
    return out;
  }
  scale(col, 1.0 / out.lagged_norm);
  state.active = c + 1;
  v.set_lag(0);
  return out;
}

std::vector<double> apply_t(const FactorState &state, std::span<const double> y,
                            bool transpose) {
  const std::size_t p = y.size();
  if (p != state.active) throw DimensionError("apply_t: length must equal the active dimension");
  std::vector<double> out(p, 0.0);
  if (state.form == ProjectorForm::cgs2) {
    // (I - L - L^T) y; symmetric, so `transpose` is irrelevant.
    for (std::size_t i = 0; i < p; ++i) {
      double sum = y[i];
      for (std::size_t k = 0; k < i; ++k) sum -= state.l(i, k) * y[k];
      for (std::size_t k = i + 1; k < p; ++k) sum -= state.l(k, i) * y[k];
      out[i] = sum;
    }
    return out;
  }
  if (transpose) {
    // T^T is unit lower triangular.
    for (std::size_t i = 0; i < p; ++i) {
      double sum = y[i];
      for (std::size_t k = 0; k < i; ++k) sum += state.t(k, i) * y[k];
      out[i] = sum;
    }
  } else {
    for (std::size_t i = 0; i < p; ++i) {
      double sum = y[i];
      for (std::size_t k = i + 1; k < p; ++k) sum += state.t(i, k) * y[k];
      out[i] = sum;
    }
  }
  return out;
}

} // namespace lowsync
