#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lowsync {

/// Sparse matrix in compressed-sparse-row form.
///
/// Construction validates the structure: row_ptr is non-decreasing, starts at
/// zero and ends at nnz, and column indices are in range and strictly
/// increasing within each row. Use CsrMatrix::from_triplets to assemble
/// unsorted or duplicated entries.
class CsrMatrix {
public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  CsrMatrix() = default;
  CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
            std::vector<std::size_t> col_idx, std::vector<double> values);

  /// Sorts by (row, col) and sums duplicates.
  static CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<Triplet> entries);
  static CsrMatrix identity(std::size_t n);
  static CsrMatrix diagonal(std::span<const double> diag);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Diagonal entries (zero where the row stores none).
  std::vector<double> diagonal() const;
  double frobenius_norm() const;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

} // namespace lowsync
