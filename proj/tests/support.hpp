#pragma once

// Independent oracles for the test suites. Everything here goes through Eigen
// (dense LU, SVD, Householder QR, symmetric eigensolves) so that no check
// relies on the code path it is checking.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lowsync/csr_matrix.hpp"
#include "lowsync/gram_schmidt.hpp"
#include "lowsync/krylov_basis.hpp"
#include "lowsync/reduction_ledger.hpp"

namespace lowsync::testing {

inline constexpr double eps = std::numeric_limits<double>::epsilon();

inline Eigen::MatrixXd to_dense(const CsrMatrix &a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.n_rows()),
                                            static_cast<Eigen::Index>(a.n_cols()));
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ci[k])) += v[k];
  return d;
}

inline CsrMatrix to_csr(const Eigen::MatrixXd &d) {
  std::vector<CsrMatrix::Triplet> t;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      if (d(i, j) != 0.0)
        t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), d(i, j)});
  return CsrMatrix::from_triplets(static_cast<std::size_t>(d.rows()),
                                  static_cast<std::size_t>(d.cols()), std::move(t));
}

inline Eigen::VectorXd to_eigen(const std::vector<double> &v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd to_eigen(const ColumnBlock &q) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(q.rows()), static_cast<Eigen::Index>(q.cols()));
  for (std::size_t j = 0; j < q.cols(); ++j)
    for (std::size_t i = 0; i < q.rows(); ++i)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = q.column(j)[i];
  return d;
}

inline Eigen::MatrixXd gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  return m;
}

inline Eigen::MatrixXd orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rows, cols, seed));
  return qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(rows),
                                                       static_cast<Eigen::Index>(cols));
}

/// U diag(sigma) V^T with singular values spaced geometrically from 1 to 1/kappa.
inline Eigen::MatrixXd with_condition(std::size_t rows, std::size_t cols, double kappa,
                                      std::uint64_t seed) {
  const Eigen::MatrixXd u = orthonormal(rows, cols, seed);
  const Eigen::MatrixXd v = orthonormal(cols, cols, seed + 1);
  Eigen::VectorXd sigma(static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < sigma.size(); ++k)
    sigma(k) = std::pow(kappa, -static_cast<double>(k) / static_cast<double>(cols - 1));
  return u * sigma.asDiagonal() * v.transpose();
}

inline double condition_number(const Eigen::MatrixXd &a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto &s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

inline double spectral_norm(const Eigen::MatrixXd &m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

inline double orthogonality_loss_oracle(const Eigen::MatrixXd &q) {
  const Eigen::MatrixXd e =
      Eigen::MatrixXd::Identity(q.cols(), q.cols()) - q.transpose() * q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Reference QR with positive diagonal of R.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> reference_qr(const Eigen::MatrixXd &a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < r.rows(); ++k)
    if (r(k, k) < 0) {
      r.row(k) *= -1.0;
      q.col(k) *= -1.0;
    }
  return {q, r};
}

enum class QrKernel { cgs1, cgs2, mgs_l1, mgs_wy, cgs2_two_sync, cgs2_lagged };

struct QrResult {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
  ReductionLedger ledger;
};

/// Column-by-column QR of `a` with one of the Gram-Schmidt kernels.
inline QrResult run_qr(const Eigen::MatrixXd &a, QrKernel kernel) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto p = static_cast<std::size_t>(a.cols());
  KrylovBasis basis(n, p + 1);
  QrResult out;
  out.r = Eigen::MatrixXd::Zero(a.cols(), a.cols());
  auto col = [&](std::size_t j) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return v;
  };

  const bool lagged = kernel == QrKernel::mgs_wy || kernel == QrKernel::cgs2_lagged;
  FactorState state(p + 1, kernel == QrKernel::mgs_wy ? ProjectorForm::wy : ProjectorForm::cgs2);
  if (lagged) {
    basis.append(col(0));
    basis.set_lag(1);
    for (std::size_t j = 1; j < p; ++j) {
      out.ledger.set_iteration(j);
      basis.append(col(j));
      if (kernel == QrKernel::mgs_wy)
        mgs_lvl2(basis, state, j, out.ledger, LagScaling::independent);
      else
        cgs2_lvl2(basis, state, j, out.ledger, LagScaling::independent);
    }
    out.ledger.set_iteration(p);
    finalize_lag(basis, state, out.ledger);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t i = 0; i <= j; ++i)
        out.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = state.r(i, j);
  } else {
    for (std::size_t j = 0; j < p; ++j) {
      out.ledger.set_iteration(j);
      const auto q = basis.leading(j);
      auto a_j = basis.append(col(j));
      GsStep step;
      switch (kernel) {
      case QrKernel::cgs1: step = cgs_iterated(q, a_j, 1, out.ledger); break;
      case QrKernel::cgs2: step = cgs_iterated(q, a_j, 2, out.ledger); break;
      case QrKernel::mgs_l1: step = mgs_level1(q, a_j, out.ledger); break;
      case QrKernel::cgs2_two_sync: step = cgs2_two_sync(q, state, a_j, out.ledger); break;
      default: break;
      }
      for (std::size_t i = 0; i < j; ++i)
        out.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = step.r[i];
      out.r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = step.r_diag;
    }
  }
  out.q = to_eigen(basis.leading(p));
  return out;
}

} // namespace lowsync::testing
