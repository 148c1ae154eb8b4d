#pragma once

#include <span>
#include <vector>

#include "lowsync/csr_matrix.hpp"

namespace lowsync {

enum class PreconditionerKind { none, jacobi };

/// Right preconditioner M^{-1}; the solvers work on A M^{-1} u = b.
class Preconditioner {
public:
  /// Identity on vectors of length n.
  static Preconditioner none(std::size_t n);
  /// Componentwise division by diag(A). Throws NumericalError on a zero diagonal.
  static Preconditioner jacobi(const CsrMatrix &a);
  static Preconditioner make(PreconditionerKind kind, const CsrMatrix &a);

  PreconditionerKind kind() const { return kind_; }
  std::size_t size() const { return n_; }

  void apply(std::span<const double> v, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> v) const;

private:
  Preconditioner(PreconditionerKind kind, std::size_t n, std::vector<double> inv_diag)
      : kind_(kind), n_(n), inv_diag_(std::move(inv_diag)) {}

  PreconditionerKind kind_;
  std::size_t n_;
  std::vector<double> inv_diag_;
};

/// out = A M^{-1} v, using `scratch` (length n) for M^{-1} v.
void apply_operator(const CsrMatrix &a, const Preconditioner &m, std::span<const double> v,
                    std::span<double> out, std::span<double> scratch);

} // namespace lowsync
