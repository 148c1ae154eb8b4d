#include "lowsync/problems.hpp"

#include <random>
#include <stdexcept>

#include "lowsync/kernels.hpp"

namespace lowsync {

CsrMatrix gen_simoncini(std::size_t n, double first) {
  if (n == 0) throw std::invalid_argument("gen_simoncini: n must be positive");
  std::vector<double> diag(n);
  diag[0] = first;
  for (std::size_t i = 1; i < n; ++i) diag[i] = static_cast<double>(i + 1);
  return CsrMatrix::diagonal(diag);
}

CsrMatrix gen_laplace2d(std::size_t nx) {
  if (nx == 0) throw std::invalid_argument("gen_laplace2d: nx must be positive");
  const std::size_t n = nx * nx;
  std::vector<CsrMatrix::Triplet> t;
  t.reserve(5 * n);
  for (std::size_t iy = 0; iy < nx; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t row = iy * nx + ix;
      if (iy > 0) t.push_back({row, row - nx, -1.0});
      if (ix > 0) t.push_back({row, row - 1, -1.0});
      t.push_back({row, row, 4.0});
      if (ix + 1 < nx) t.push_back({row, row + 1, -1.0});
      if (iy + 1 < nx) t.push_back({row, row + nx, -1.0});
    }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

std::vector<double> gen_rhs(const RhsSpec &spec, const CsrMatrix &a) {
  if (spec.kind == RhsKind::ones_image) {
    const std::vector<double> ones(a.n_cols(), 1.0);
    return spmv(a, ones);
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> b(a.n_rows());
  for (auto &v : b) v = normal(rng);
  scale(b, 1.0 / local_norm2(b));
  return b;
}

} // namespace lowsync
