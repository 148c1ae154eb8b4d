#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lowsync {

/// Read-only view of the leading columns of a column-major block.
class ColumnBlock {
public:
  ColumnBlock(const double *data, std::size_t n, std::size_t p) : data_(data), n_(n), p_(p) {}

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }
  std::span<const double> column(std::size_t j) const { return {data_ + j * n_, n_}; }
  ColumnBlock leading(std::size_t p) const { return {data_, n_, p}; }

private:
  const double *data_;
  std::size_t n_;
  std::size_t p_;
};

/// Column store for the Krylov (or Q-factor) basis.
///
/// Storage is contiguous column-major with a fixed capacity, typically m+2 for
/// a restart length m: the lagged-normalization solvers hold one look-ahead
/// column beyond the m+1 Arnoldi vectors. The trailing `lag()` columns may be
/// un-normalized; all earlier columns have unit norm.
class KrylovBasis {
public:
  KrylovBasis(std::size_t n, std::size_t capacity)
      : n_(n), capacity_(capacity), storage_(n * capacity, 0.0) {}

  std::size_t n() const { return n_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t lag() const { return lag_; }
  void set_lag(std::size_t lag);

  /// Appends a zero column and returns it for filling.
  std::span<double> append();
  /// Appends a copy of `values`.
  std::span<double> append(std::span<const double> values);
  void clear() {
    n_cols_ = 0;
    lag_ = 0;
  }
  /// Drops trailing columns so that `count` remain.
  void truncate(std::size_t count);

  std::span<double> column(std::size_t j);
  std::span<const double> column(std::size_t j) const;

  ColumnBlock leading(std::size_t p) const;
  ColumnBlock columns() const { return leading(n_cols_); }

private:
  std::size_t n_;
  std::size_t capacity_;
  std::size_t n_cols_ = 0;
  std::size_t lag_ = 0;
  std::vector<double> storage_;
};

} // namespace lowsync
