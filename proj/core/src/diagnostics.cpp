#include "lowsync/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lowsync/errors.hpp"
#include "lowsync/kernels.hpp"

namespace lowsync {

namespace {

// Largest eigenvalue of the symmetric tridiagonal (a, b) by Sturm bisection.
double largest_tridiagonal_eigenvalue(const std::vector<double> &a, const std::vector<double> &b) {
  const std::size_t k = a.size();
  double lo = a[0], hi = a[0];
  for (std::size_t i = 0; i < k; ++i) {
    const double radius = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < k ? std::abs(b[i]) : 0.0);
    lo = std::min(lo, a[i] - radius);
    hi = std::max(hi, a[i] + radius);
  }
  // Number of eigenvalues below x.
  auto below = [&](double x) {
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      d = a[i] - x - (i > 0 ? b[i - 1] * b[i - 1] / d : 0.0);
      if (d == 0.0) d = -std::numeric_limits<double>::min();
      if (d < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200 && hi - lo > 2 * std::numeric_limits<double>::epsilon() *
                                                 std::max(std::abs(lo), std::abs(hi));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid) == k) hi = mid;
    else lo = mid;
  }
  return hi;
}

} // namespace

double spectral_norm_small(const DenseMatrix &m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  if (rows == 0 || cols == 0) return 0.0;

  // Power iteration on M^T M, accelerated by keeping the whole Krylov basis
  // (Lanczos with full reorthogonalization).
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  std::vector<std::vector<double>> q(1, std::vector<double>(cols));
  for (auto &v : q[0]) v = dist(rng);
  scale(q[0], 1.0 / local_norm2(q[0]));

  std::vector<double> alpha, beta, mx(rows), w(cols);
  double theta = 0.0;
  const std::size_t max_iter = std::min(cols, 10 * cols);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const auto &x = q.back();
    for (std::size_t i = 0; i < rows; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < cols; ++j) sum += m(i, j) * x[j];
      mx[i] = sum;
    }
    for (std::size_t j = 0; j < cols; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rows; ++i) sum += m(i, j) * mx[i];
      w[j] = sum;
    }
    alpha.push_back(local_dot(x, w));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto &qk : q) axpy(-local_dot(qk, w), qk, w);

    const double previous = theta;
    theta = largest_tridiagonal_eigenvalue(alpha, beta);
    const double b = local_norm2(w);
    const bool done = (it > 0 && std::abs(theta - previous) <= 1e-10 * theta) ||
                      b <= 1e-14 * std::max(theta, alpha.front());
    if (done) break;
    beta.push_back(b);
    scale(w, 1.0 / b);
    q.push_back(w);
  }
  return std::sqrt(std::max(theta, 0.0));
}

DenseMatrix gram_matrix(const ColumnBlock &q) {
  const std::size_t p = q.cols();
  DenseMatrix g(p, p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i <= j; ++i) {
      const double v = local_dot(q.column(i), q.column(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

DenseMatrix paige_s(const ColumnBlock &q) {
  const std::size_t p = q.cols();
  const DenseMatrix g = gram_matrix(q);
  // (I + U) S = U with U = L^T strictly upper; back substitution per column.
  DenseMatrix s(p, p);
  for (std::size_t col = 0; col < p; ++col) {
    for (std::size_t ii = p; ii-- > 0;) {
      double sum = ii < col ? g(ii, col) : 0.0;
      for (std::size_t k = ii + 1; k < p; ++k) sum -= g(ii, k) * s(k, col);
      s(ii, col) = sum;
    }
  }
  return s;
}

double paige_metric(const ColumnBlock &q) {
  if (q.cols() == 0) throw DimensionError("paige_metric: needs at least one column");
  return spectral_norm_small(paige_s(q));
}

double orthogonality_loss(const ColumnBlock &q) {
  DenseMatrix e = gram_matrix(q);
  for (std::size_t j = 0; j < e.cols(); ++j)
    for (std::size_t i = 0; i < e.rows(); ++i) e(i, j) = (i == j ? 1.0 : 0.0) - e(i, j);
  return spectral_norm_small(e);
}

double arnoldi_residual(const CsrMatrix &a, const ColumnBlock &v, const DenseMatrix &hbar,
                        std::size_t m, const Preconditioner *precond) {
  if (v.cols() < m + 1 || hbar.rows() < m + 1 || hbar.cols() < m)
    throw DimensionError("arnoldi_residual: basis or Hessenberg too small");
  const std::size_t n = v.rows();
  const Preconditioner identity = Preconditioner::none(n);
  const Preconditioner &mop = precond ? *precond : identity;
  std::vector<double> av(n), scratch(n);
  double ssq = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    apply_operator(a, mop, v.column(j), av, scratch);
    for (std::size_t i = 0; i <= j + 1; ++i) axpy(-hbar(i, j), v.column(i), av);
    for (double r : av) ssq += r * r;
  }
  const double norm_a = a.frobenius_norm();
  return norm_a > 0.0 ? std::sqrt(ssq) / norm_a : std::sqrt(ssq);
}

} // namespace lowsync
