#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lowsync/csr_matrix.hpp"
#include "lowsync/dense_matrix.hpp"
#include "lowsync/krylov_basis.hpp"
#include "lowsync/preconditioner.hpp"

namespace lowsync {

// Stability instrumentation. Nothing here touches a ReductionLedger: these
// quantities are laboratory measurements, not part of a production solve.

/// ||M||_2 from the dominant eigenvalue of M^T M. Power iteration from a
/// fixed-seed start vector, accelerated by keeping the Krylov basis (Lanczos);
/// stops when the estimate changes by less than 1e-10 relative, or after
/// 10 * cols iterations.
double spectral_norm_small(const DenseMatrix &m);

/// G = Q^T Q.
DenseMatrix gram_matrix(const ColumnBlock &q);

/// S = (I + L^T)^{-1} L^T with Q^T Q = I + L + L^T; returns S itself.
DenseMatrix paige_s(const ColumnBlock &q);

/// Paige's loss-of-orthogonality measure ||S||_2: O(eps) for orthonormal
/// columns, approaching 1 once they become numerically dependent.
double paige_metric(const ColumnBlock &q);

/// ||I - Q^T Q||_2.
double orthogonality_loss(const ColumnBlock &q);

/// ||A M^{-1} V_m - V_{m+1} Hbar_m||_F / ||A||_F, with Hbar_m the leading
/// (m+1) x m block of `hbar` and V the first m+1 columns of `v`.
double arnoldi_residual(const CsrMatrix &a, const ColumnBlock &v, const DenseMatrix &hbar,
                        std::size_t m, const Preconditioner *precond = nullptr);

struct StabilityReport {
  std::vector<double> s_norm;
  std::vector<double> orth_loss;
  std::vector<double> arnoldi_residual;
  double kappa_estimate = 0.0;
  /// First iteration (1-based) with ||S||_2 >= 0.99.
  std::optional<std::size_t> stall_iteration;
};

} // namespace lowsync
