#include "lowsync/krylov_basis.hpp"

#include <algorithm>
#include <string>

#include "lowsync/errors.hpp"

namespace lowsync {

void KrylovBasis::set_lag(std::size_t lag) {
  if (lag > 1 || lag > n_cols_) throw DimensionError("KrylovBasis: lag must be 0 or 1");
  lag_ = lag;
}

std::span<double> KrylovBasis::append() {
  if (n_cols_ == capacity_)
    throw DimensionError("KrylovBasis: capacity " + std::to_string(capacity_) + " exhausted");
  auto col = std::span<double>(storage_.data() + n_cols_ * n_, n_);
  std::fill(col.begin(), col.end(), 0.0);
  ++n_cols_;
  return col;
}

std::span<double> KrylovBasis::append(std::span<const double> values) {
  if (values.size() != n_) throw DimensionError("KrylovBasis::append: length mismatch");
  auto col = append();
  std::copy(values.begin(), values.end(), col.begin());
  return col;
}

void KrylovBasis::truncate(std::size_t count) {
  if (count > n_cols_) throw DimensionError("KrylovBasis::truncate: count exceeds columns");
  n_cols_ = count;
  lag_ = std::min(lag_, n_cols_);
}

std::span<double> KrylovBasis::column(std::size_t j) {
  if (j >= n_cols_) throw DimensionError("KrylovBasis::column: index out of range");
  return {storage_.data() + j * n_, n_};
}

std::span<const double> KrylovBasis::column(std::size_t j) const {
  if (j >= n_cols_) throw DimensionError("KrylovBasis::column: index out of range");
  return {storage_.data() + j * n_, n_};
}

ColumnBlock KrylovBasis::leading(std::size_t p) const {
  if (p > n_cols_) throw DimensionError("KrylovBasis::leading: more columns than stored");
  return {storage_.data(), n_, p};
}

} // namespace lowsync
