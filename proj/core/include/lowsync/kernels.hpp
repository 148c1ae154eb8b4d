#pragma once

#include <span>
#include <utility>
#include <vector>

#include "lowsync/csr_matrix.hpp"
#include "lowsync/krylov_basis.hpp"
#include "lowsync/reduction_ledger.hpp"

namespace lowsync {

// Vector and matrix primitives. Reductions sum in ascending index order with
// a scalar accumulator so results are reproducible bit for bit on a platform.
// Every reduction-shaped call appends exactly one ledger event; SpMV and MAXPY
// are communication-free and append none.

/// y = A x. Throws DimensionError or NumericalError (non-finite result).
std::vector<double> spmv(const CsrMatrix &a, std::span<const double> x);
void spmv(const CsrMatrix &a, std::span<const double> x, std::span<double> y);

/// Single inner product; one `dot` event.
double dot(std::span<const double> x, std::span<const double> y, ReductionLedger &ledger);

/// v[j] = <x_j, y> for every column of `x`; one `mdot` event (none if empty).
std::vector<double> mass_inner_product(const ColumnBlock &x, std::span<const double> y,
                                       ReductionLedger &ledger);

/// (X^T y, ||z||_2) under a single `fused_mdot_norm` event.
std::pair<std::vector<double>, double> fused_mdot_norm(const ColumnBlock &x,
                                                       std::span<const double> y,
                                                       std::span<const double> z,
                                                       ReductionLedger &ledger);

/// One mass inner product against a block of columns.
struct MdotTerm {
  ColumnBlock columns;
  std::span<const double> y;
};

struct FusedReductionResult {
  std::vector<std::vector<double>> products;
  double norm = 0.0;
};

/// Several mass inner products plus an optional norm, all under one event.
///
/// This is the batched reduction behind the level-2 Gram-Schmidt kernels. The
/// event kind is `fused_mdot_norm` when `norm_of` is non-empty and `mdot`
/// otherwise; scalar_count is the total number of reduced scalars.
FusedReductionResult fused_reduction(std::span<const MdotTerm> terms,
                                     std::span<const double> norm_of,
                                     ReductionLedger &ledger);

/// y += sum_j alpha[j] x_j, columns applied left to right. No event.
void maxpy_inplace(std::span<double> y, const ColumnBlock &x, std::span<const double> alpha);
std::vector<double> maxpy(std::span<const double> y, const ColumnBlock &x,
                          std::span<const double> alpha);

/// Overflow-safe Euclidean norm; one `norm` event.
double norm2(std::span<const double> x, ReductionLedger &ledger);

// Local (ledger-free) helpers for diagnostics and oracles.
double local_dot(std::span<const double> x, std::span<const double> y);
double local_norm2(std::span<const double> x);
void scale(std::span<double> x, double factor);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Throws NumericalError naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> x, const char *what);

} // namespace lowsync
