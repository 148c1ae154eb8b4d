#include "lowsync/preconditioner.hpp"

#include <algorithm>
#include <string>

#include "lowsync/errors.hpp"
#include "lowsync/kernels.hpp"

namespace lowsync {

Preconditioner Preconditioner::none(std::size_t n) { return {PreconditionerKind::none, n, {}}; }

Preconditioner Preconditioner::jacobi(const CsrMatrix &a) {
  if (a.n_rows() != a.n_cols()) throw DimensionError("jacobi: matrix must be square");
  auto diag = a.diagonal();
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0)
      throw NumericalError("jacobi: zero diagonal entry at row " + std::to_string(i));
    diag[i] = 1.0 / diag[i];
  }
  return {PreconditionerKind::jacobi, a.n_rows(), std::move(diag)};
}

Preconditioner Preconditioner::make(PreconditionerKind kind, const CsrMatrix &a) {
  return kind == PreconditionerKind::jacobi ? jacobi(a) : none(a.n_rows());
}

void Preconditioner::apply(std::span<const double> v, std::span<double> out) const {
  if (v.size() != n_ || out.size() != n_) throw DimensionError("preconditioner: length mismatch");
  if (kind_ == PreconditionerKind::none) {
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  for (std::size_t i = 0; i < n_; ++i) out[i] = v[i] * inv_diag_[i];
}

std::vector<double> Preconditioner::apply(std::span<const double> v) const {
  std::vector<double> out(v.size());
  apply(v, out);
  return out;
}

void apply_operator(const CsrMatrix &a, const Preconditioner &m, std::span<const double> v,
                    std::span<double> out, std::span<double> scratch) {
  if (m.kind() == PreconditionerKind::none) {
    spmv(a, v, out);
    return;
  }
  m.apply(v, scratch);
  spmv(a, scratch, out);
}

} // namespace lowsync
