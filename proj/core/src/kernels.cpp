#include "lowsync/kernels.hpp"

#include <cmath>
#include <string>

#include "lowsync/errors.hpp"

namespace lowsync {
namespace {

void require_same_length(std::size_t a, std::size_t b, const char *what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
}

// Scaled sum of squares: value = scale * sqrt(ssq), never forms x^2 of a huge x.
struct ScaledSsq {
  double scale = 0.0;
  double ssq = 1.0;

  void add(double x) {
    if (x == 0.0) return;
    const double a = std::abs(x);
    if (scale < a) {
      const double ratio = scale / a;
      ssq = 1.0 + ssq * ratio * ratio;
      scale = a;
    } else {
      const double ratio = a / scale;
      ssq += ratio * ratio;
    }
  }
  double value() const { return scale * std::sqrt(ssq); }
};

double scaled_norm(std::span<const double> x) {
  ScaledSsq acc;
  for (double v : x) acc.add(v);
  return acc.value();
}

} // namespace

void require_finite(std::span<const double> x, const char *what) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw NumericalError(std::string(what) + ": non-finite entry at index " +
                           std::to_string(i));
}

void spmv(const CsrMatrix &a, std::span<const double> x, std::span<double> y) {
  require_same_length(a.n_cols(), x.size(), "spmv");
  require_same_length(a.n_rows(), y.size(), "spmv");
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto values = a.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    double sum = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) sum += values[k] * x[col_idx[k]];
    y[i] = sum;
  }
  require_finite(y, "spmv");
}

std::vector<double> spmv(const CsrMatrix &a, std::span<const double> x) {
  std::vector<double> y(a.n_rows());
  spmv(a, x, y);
  return y;
}

double local_dot(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

double local_norm2(std::span<const double> x) {
  require_finite(x, "norm2");
  return scaled_norm(x);
}

double dot(std::span<const double> x, std::span<const double> y, ReductionLedger &ledger) {
  const double v = local_dot(x, y);
  ledger.record(ReductionKind::dot, 1);
  return v;
}

std::vector<double> mass_inner_product(const ColumnBlock &x, std::span<const double> y,
                                       ReductionLedger &ledger) {
  require_same_length(x.rows(), y.size(), "mass_inner_product");
  std::vector<double> v(x.cols());
  if (v.empty()) return v;
  for (std::size_t j = 0; j < x.cols(); ++j) v[j] = local_dot(x.column(j), y);
  ledger.record(ReductionKind::mdot, v.size());
  return v;
}

FusedReductionResult fused_reduction(std::span<const MdotTerm> terms,
                                     std::span<const double> norm_of,
                                     ReductionLedger &ledger) {
  FusedReductionResult result;
  result.products.reserve(terms.size());
  std::size_t scalars = 0;
  for (const auto &term : terms) {
    require_same_length(term.columns.rows(), term.y.size(), "fused_reduction");
    auto &products = result.products.emplace_back(term.columns.cols());
    for (std::size_t j = 0; j < term.columns.cols(); ++j)
      products[j] = local_dot(term.columns.column(j), term.y);
    scalars += products.size();
  }
  if (!norm_of.empty()) {
    result.norm = local_norm2(norm_of);
    ++scalars;
  }
  if (scalars > 0)
    ledger.record(norm_of.empty() ? ReductionKind::mdot : ReductionKind::fused_mdot_norm, scalars);
  return result;
}

std::pair<std::vector<double>, double> fused_mdot_norm(const ColumnBlock &x,
                                                       std::span<const double> y,
                                                       std::span<const double> z,
                                                       ReductionLedger &ledger) {
  require_same_length(x.rows(), y.size(), "fused_mdot_norm");
  require_same_length(x.rows(), z.size(), "fused_mdot_norm");
  const MdotTerm term{x, y};
  auto result = fused_reduction(std::span(&term, 1), z, ledger);
  return {std::move(result.products.front()), result.norm};
}

void maxpy_inplace(std::span<double> y, const ColumnBlock &x, std::span<const double> alpha) {
  require_same_length(x.rows(), y.size(), "maxpy");
  require_same_length(x.cols(), alpha.size(), "maxpy");
  for (std::size_t j = 0; j < x.cols(); ++j) axpy(alpha[j], x.column(j), y);
}

std::vector<double> maxpy(std::span<const double> y, const ColumnBlock &x,
                          std::span<const double> alpha) {
  std::vector<double> out(y.begin(), y.end());
  maxpy_inplace(out, x, alpha);
  return out;
}

double norm2(std::span<const double> x, ReductionLedger &ledger) {
  const double v = local_norm2(x);
  ledger.record(ReductionKind::norm, 1);
  return v;
}

void scale(std::span<double> x, double factor) {
  for (double &v : x) v *= factor;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_length(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

} // namespace lowsync
