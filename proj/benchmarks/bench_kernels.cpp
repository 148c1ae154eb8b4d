// Micro benchmarks for the communication-shaped kernels and one GMRES cycle
// per method. Ledger bookkeeping is included in the timings.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "lowsync/gmres.hpp"
#include "lowsync/gram_schmidt.hpp"
#include "lowsync/kernels.hpp"
#include "lowsync/problems.hpp"

namespace {

using namespace lowsync;

KrylovBasis random_basis(std::size_t n, std::size_t p) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  KrylovBasis basis(n, p + 1);
  for (std::size_t j = 0; j < p; ++j) {
    auto col = basis.append();
    for (auto &v : col) v = normal(rng);
  }
  return basis;
}

void BM_spmv_laplace(benchmark::State &state) {
  const auto a = gen_laplace2d(static_cast<std::size_t>(state.range(0)));
  std::vector<double> x(a.n_rows(), 1.0), y(a.n_rows());
  for (auto _ : state) {
    spmv(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * a.nnz()));
}
BENCHMARK(BM_spmv_laplace)->Arg(64)->Arg(256);

void BM_mass_inner_product(benchmark::State &state) {
  const std::size_t n = 1 << 16, p = static_cast<std::size_t>(state.range(0));
  const auto basis = random_basis(n, p);
  std::vector<double> y(n, 0.5);
  ReductionLedger ledger;
  for (auto _ : state) benchmark::DoNotOptimize(mass_inner_product(basis.columns(), y, ledger));
}
BENCHMARK(BM_mass_inner_product)->Arg(5)->Arg(20)->Arg(50);

void BM_maxpy(benchmark::State &state) {
  const std::size_t n = 1 << 16, p = static_cast<std::size_t>(state.range(0));
  const auto basis = random_basis(n, p);
  std::vector<double> y(n, 0.0), alpha(p, 1e-3);
  for (auto _ : state) {
    maxpy_inplace(y, basis.columns(), alpha);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_maxpy)->Arg(5)->Arg(20)->Arg(50);

void BM_norm2(benchmark::State &state) {
  std::vector<double> x(1 << 16, 0.25);
  ReductionLedger ledger;
  for (auto _ : state) benchmark::DoNotOptimize(norm2(x, ledger));
}
BENCHMARK(BM_norm2);

// One orthogonalization step against p columns.
void BM_gs_step(benchmark::State &state) {
  const std::size_t n = 1 << 14, p = 30;
  const auto basis = random_basis(n, p);
  std::vector<double> a(n, 1.0), work(n);
  ReductionLedger ledger;
  for (auto _ : state) {
    std::copy(a.begin(), a.end(), work.begin());
    switch (state.range(0)) {
    case 0: mgs_level1(basis.columns(), work, ledger); break;
    case 1: cgs_iterated(basis.columns(), work, 1, ledger); break;
    default: cgs_iterated(basis.columns(), work, 2, ledger); break;
    }
    benchmark::DoNotOptimize(work.data());
  }
}
BENCHMARK(BM_gs_step)->Arg(0)->Arg(1)->Arg(2);

void BM_gmres_cycle(benchmark::State &state) {
  const auto a = gen_laplace2d(64);
  const auto b = gen_rhs({}, a);
  GmresConfig cfg;
  cfg.restart_m = 30;
  cfg.rel_tol = 1e-300;
  cfg.method = static_cast<GmresMethod>(state.range(0));
  DiagnosticsOptions diag;
  diag.enabled = false;
  for (auto _ : state) {
    ReductionLedger ledger;
    benchmark::DoNotOptimize(solve(a, b, {}, cfg, ledger, diag));
  }
  state.SetLabel(std::string(to_string(cfg.method)));
}
BENCHMARK(BM_gmres_cycle)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
