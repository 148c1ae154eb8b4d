#pragma once

#include <cstdint>
#include <vector>

#include "lowsync/csr_matrix.hpp"

namespace lowsync {

/// diag(first, 2, 3, ..., n): the classic limiting-accuracy test matrix.
/// With the defaults kappa = 100 / 1e-8 = 1e10.
CsrMatrix gen_simoncini(std::size_t n = 100, double first = 1e-8);

/// 5-point Laplacian on an nx-by-nx grid (Dirichlet), n = nx^2.
CsrMatrix gen_laplace2d(std::size_t nx);

enum class RhsKind { ones_image, random };

struct RhsSpec {
  RhsKind kind = RhsKind::random;
  std::uint64_t seed = 42;
};

/// ones_image: b = A * (1, ..., 1). random: standard normal entries from a
/// seeded mt19937_64, scaled to unit 2-norm.
std::vector<double> gen_rhs(const RhsSpec &spec, const CsrMatrix &a);

} // namespace lowsync
