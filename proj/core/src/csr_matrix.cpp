#include "lowsync/csr_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowsync/errors.hpp"

namespace lowsync {

CsrMatrix::CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : n_rows_(n_rows), n_cols_(n_cols), row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)), values_(std::move(values)) {
  if (row_ptr_.size() != n_rows_ + 1)
    throw DimensionError("CsrMatrix: row_ptr must have n_rows+1 entries");
  if (row_ptr_.front() != 0) throw DimensionError("CsrMatrix: row_ptr[0] must be 0");
  if (col_idx_.size() != values_.size() || row_ptr_.back() != values_.size())
    throw DimensionError("CsrMatrix: row_ptr[n_rows], col_idx and values disagree on nnz");
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1])
      throw DimensionError("CsrMatrix: row_ptr decreases at row " + std::to_string(i));
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= n_cols_)
        throw DimensionError("CsrMatrix: column index out of range in row " + std::to_string(i));
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
        throw DimensionError("CsrMatrix: column indices not strictly increasing in row " +
                             std::to_string(i));
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet &a, const Triplet &b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_ptr(n_rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto &e = entries[k];
    if (e.row >= n_rows || e.col >= n_cols)
      throw DimensionError("CsrMatrix::from_triplets: entry out of range");
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      values.back() += e.value;
      continue;
    }
    col_idx.push_back(e.col);
    values.push_back(e.value);
    ++row_ptr[e.row + 1];
  }
  for (std::size_t i = 0; i < n_rows; ++i) row_ptr[i + 1] += row_ptr[i];
  return {n_rows, n_cols, std::move(row_ptr), std::move(col_idx), std::move(values)};
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<std::size_t> col_idx(n);
  for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
  return {n, n, std::move(row_ptr), std::move(col_idx), {diag.begin(), diag.end()}};
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(n_rows_, n_cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, i);
    if (it != last && *it == i) d[i] = values_[static_cast<std::size_t>(it - col_idx_.begin())];
  }
  return d;
}

double CsrMatrix::frobenius_norm() const {
  double scale = 0.0, ssq = 1.0;
  for (double v : values_) {
    if (v == 0.0) continue;
    const double a = std::abs(v);
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

} // namespace lowsync
