#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lowsync/dense_matrix.hpp"
#include "lowsync/krylov_basis.hpp"
#include "lowsync/reduction_ledger.hpp"

namespace lowsync {

/// Which correction matrix a FactorState carries.
///  - wy:   compact WY form of MGS, T = (I + L^T)^{-1}, unit upper triangular,
///          built column by column with the Malard-Paige recursion.
///  - cgs2: T = I - L - L^T, applied on the fly from the stored rows of L.
enum class ProjectorForm { wy, cgs2 };

/// How the look-ahead column relates to the lagged one.
///  - krylov:      the new column was produced as A * (un-normalized lagged
///                 column), so it carries the lagged norm as a factor and is
///                 rescaled together with it.
///  - independent: the new column is an input column (plain QR).
enum class LagScaling { krylov, independent };

enum class GsStatus { ok, breakdown };

/// Small dense factors shared by the low-synchronization kernels.
///
/// `active` counts the normalized columns the factors describe. For a basis
/// with a lagged column, `active` is one less than the stored column count.
struct FactorState {
  FactorState(std::size_t capacity, ProjectorForm form);

  void reset();

  ProjectorForm form;
  DenseMatrix r;
  DenseMatrix t;
  /// Strictly lower part of Q^T Q, one row per normalized column.
  DenseMatrix l;
  std::size_t active = 0;
  /// ||projection coefficients|| of the lagged column, for the breakdown test.
  double lag_coefficient_norm = 0.0;
};

/// Result of orthogonalizing one column.
struct GsStep {
  std::vector<double> r;
  double r_diag = 0.0;
  GsStatus status = GsStatus::ok;
};

/// Breakdown when r_diag <= factor * 2^-52 * sqrt(n) * ||column before
/// projection||, the latter taken as hypot(||r||, r_diag).
bool is_breakdown(double r_diag, double coefficient_norm, std::size_t n, double factor);

/// Classical Gram-Schmidt with `passes` projection passes (2 = CGS2).
///
/// `a` is orthogonalized against the columns of `q` in place and normalized
/// unless a breakdown is reported. One mdot event per pass plus one norm.
GsStep cgs_iterated(const ColumnBlock &q, std::span<double> a, int passes,
                    ReductionLedger &ledger, double breakdown_factor = 1.0);

/// Level-1 modified Gram-Schmidt: p rank-1 updates, each with its own `dot`
/// event, then the norm. p + 1 events.
GsStep mgs_level1(const ColumnBlock &q, std::span<double> a, ReductionLedger &ledger,
                  double breakdown_factor = 1.0);

/// Iterated CGS with two synchronizations.
///
/// The first reduction batches Q^T a with the row of L belonging to the last
/// column of `q`; r = (I - L - L^T) Q^T a; a <- a - Q r; the second reduction
/// is the norm. `state` must use ProjectorForm::cgs2 and describe the columns
/// of `q` (state.active == q.cols() on entry, +1 on exit).
GsStep cgs2_two_sync(const ColumnBlock &q, FactorState &state, std::span<double> a,
                     ReductionLedger &ledger, double breakdown_factor = 1.0);

/// Outcome of a lagged level-2 call: the norm of the column that was just
/// normalized (one step late).
struct LaggedStep {
  double lagged_norm = 0.0;
  GsStatus status = GsStatus::ok;
};

/// Level-2 MGS with normalization lag, one global reduction.
///
/// Entry: `v` holds j+1 columns; columns 0..j-2 are orthonormal, column j-1 is
/// projected but un-normalized, column j is new. Exit: column j-1 is
/// normalized (its norm lands in R(j-1,j-1)), R(0..j-1, j) and T column j-1
/// are filled, and column j is projected and becomes the lagged column.
/// On breakdown nothing is normalized or projected.
LaggedStep mgs_lvl2(KrylovBasis &v, FactorState &state, std::size_t j, ReductionLedger &ledger,
                    LagScaling scaling, double breakdown_factor = 1.0);

/// Level-2 iterated CGS with normalization lag, two global reductions.
///
/// Same entry/exit contract as mgs_lvl2. The first reduction matches
/// mgs_lvl2; the coefficients are corrected with T = I - L - L^T and a second
/// mass inner product reorthogonalizes the new column.
LaggedStep cgs2_lvl2(KrylovBasis &v, FactorState &state, std::size_t j, ReductionLedger &ledger,
                     LagScaling scaling, double breakdown_factor = 1.0);

/// Normalizes the trailing lagged column (one norm event).
LaggedStep finalize_lag(KrylovBasis &v, FactorState &state, ReductionLedger &ledger,
                        double breakdown_factor = 1.0);

/// T y (or T^T y) over the leading y.size() x y.size() block of `state`.
std::vector<double> apply_t(const FactorState &state, std::span<const double> y,
                            bool transpose);

} // namespace lowsync
