#include <doctest.h>

#include <cmath>
#include <random>

#include "lowsync/diagnostics.hpp"
#include "lowsync/errors.hpp"
#include "lowsync/gram_schmidt.hpp"
#include "lowsync/kernels.hpp"
#include "lowsync/problems.hpp"
#include "support.hpp"

using namespace lowsync;
using lowsync::testing::eps;
using lowsync::testing::QrKernel;

namespace {

std::vector<double> col_of(const Eigen::MatrixXd &m, Eigen::Index j) {
  return {m.col(j).data(), m.col(j).data() + m.rows()};
}

KrylovBasis basis_from(const Eigen::MatrixXd &m, std::size_t capacity) {
  KrylovBasis b(static_cast<std::size_t>(m.rows()), capacity);
  for (Eigen::Index j = 0; j < m.cols(); ++j) b.append(col_of(m, j));
  return b;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

TEST_CASE("cgs_iterated") {
  ReductionLedger ledger;
  SUBCASE("empty basis just normalizes") {
    KrylovBasis q(3, 1);
    std::vector<double> a{0, 3, 0};
    const auto step = cgs_iterated(q.columns(), a, 2, ledger);
    CHECK(a == std::vector<double>{0, 1, 0});
    CHECK(step.r.empty());
    CHECK(step.r_diag == 3.0);
    CHECK(ledger.size() == 1);
  }
  SUBCASE("twice is enough on a nearly dependent column") {
    const auto qm = testing::orthonormal(30, 4, 5);
    const auto q = basis_from(qm, 4);
    Eigen::VectorXd a = qm * Eigen::VectorXd::LinSpaced(4, 1.0, 4.0) +
                        1e-8 * testing::gaussian(30, 1, 6).col(0);
    std::vector<double> av(a.data(), a.data() + 30);
    for (int passes : {1, 2, 3}) {
      auto work = av;
      const std::size_t before = ledger.size();
      cgs_iterated(q.columns(), work, passes, ledger);
      CHECK(ledger.size() - before == static_cast<std::size_t>(passes) + 1);
      if (passes >= 2) {
        const auto proj = mass_inner_product(q.columns(), work, ledger);
        CHECK(max_abs(proj) <= 100 * eps);
      }
    }
  }
  SUBCASE("breakdown on a column inside the span") {
    KrylovBasis q(3, 2);
    q.append(std::vector<double>{1, 0, 0});
    std::vector<double> a{2, 0, 0};
    CHECK(cgs_iterated(q.columns(), a, 2, ledger).status == GsStatus::breakdown);
  }
  SUBCASE("argument errors") {
    KrylovBasis q(3, 1);
    std::vector<double> a{1, 0, 0}, b{1, 0};
    CHECK_THROWS_AS(cgs_iterated(q.columns(), a, 0, ledger), std::invalid_argument);
    CHECK_THROWS_AS(cgs_iterated(q.columns(), b, 1, ledger), DimensionError);
  }
}

TEST_CASE("mgs_level1") {
  ReductionLedger ledger;
  KrylovBasis q(3, 1);
  q.append(std::vector<double>{1, 0, 0});
  std::vector<double> a{1, 1, 0};
  const auto step = mgs_level1(q.columns(), a, ledger);
  CHECK(a == std::vector<double>{0, 1, 0});
  CHECK(step.r == std::vector<double>{1});
  CHECK(step.r_diag == 1.0);
  CHECK(ledger.size() == 2);

  for (std::size_t p = 0; p < 8; ++p) {
    const auto basis = basis_from(testing::orthonormal(12, p == 0 ? 1 : p, 40 + p), 8);
    std::vector<double> v = col_of(testing::gaussian(12, 1, p), 0);
    ReductionLedger l;
    mgs_level1(basis.leading(p), v, l);
    CHECK(l.size() == p + 1);
    CHECK(l.count_of_kind(ReductionKind::dot) == p);
  }
}

TEST_CASE("cgs2_two_sync") {
  ReductionLedger ledger;
  KrylovBasis q(3, 2);
  FactorState state(3, ProjectorForm::cgs2);
  auto first = q.append(std::vector<double>{1, 0, 0});
  cgs2_two_sync(q.leading(0), state, first, ledger);
  CHECK(state.active == 1);

  auto a = q.append(std::vector<double>{2, 2, 0});
  const std::size_t before = ledger.size();
  const auto step = cgs2_two_sync(q.leading(1), state, a, ledger);
  CHECK(step.r == std::vector<double>{2});
  CHECK(step.r_diag == 2.0);
  CHECK(q.column(1)[0] == 0.0);
  CHECK(q.column(1)[1] == 1.0);
  REQUIRE(ledger.size() - before == 2);
  CHECK(ledger.events()[before].kind == ReductionKind::mdot);
  CHECK(ledger.events()[before + 1].kind == ReductionKind::norm);

  CHECK_THROWS_AS(cgs2_two_sync(q.leading(1), state, a, ledger), DimensionError);
  FactorState wy(3, ProjectorForm::wy);
  CHECK_THROWS_AS(cgs2_two_sync(q.leading(0), wy, a, ledger), std::invalid_argument);
}

TEST_CASE("cgs2_two_sync keeps Krylov columns orthogonal on the Simoncini matrix") {
  const auto a = gen_simoncini();
  auto b = gen_rhs({}, a);
  KrylovBasis v(100, 41);
  FactorState state(41, ProjectorForm::cgs2);
  ReductionLedger ledger;
  cgs2_two_sync(v.leading(0), state, v.append(b), ledger);
  for (std::size_t k = 0; k < 40; ++k) {
    auto w = v.append(spmv(a, v.column(k)));
    const auto step = cgs2_two_sync(v.leading(k + 1), state, w, ledger);
    REQUIRE(step.status == GsStatus::ok);
    CHECK(paige_metric(v.leading(k + 2)) <= 100 * eps);
  }
  CHECK(ledger.size() == 1 + 2 * 40);

  // Q^T Q = I + L + L^T with L as accumulated by the kernel.
  const auto g = gram_matrix(v.leading(40));
  double worst = 0.0;
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t k = 0; k < i; ++k) worst = std::max(worst, std::abs(g(i, k) - state.l(i, k)));
  CHECK(worst <= 100 * eps);
}

TEST_CASE("mgs_lvl2 hand example") {
  for (auto scaling : {LagScaling::independent, LagScaling::krylov}) {
    CAPTURE(static_cast<int>(scaling));
    KrylovBasis v(3, 3);
    FactorState state(3, ProjectorForm::wy);
    ReductionLedger ledger;
    v.append(std::vector<double>{0, 2, 0});
    v.set_lag(1);
    // In Krylov mode the new column is A times the un-normalized column and
    // carries its norm.
    v.append(scaling == LagScaling::krylov ? std::vector<double>{2, 2, 0}
                                           : std::vector<double>{1, 1, 0});
    const auto out = mgs_lvl2(v, state, 1, ledger, scaling);
    CHECK(out.status == GsStatus::ok);
    CHECK(out.lagged_norm == 2.0);
    CHECK(ledger.size() == 1);
    CHECK(ledger.events()[0].kind == ReductionKind::fused_mdot_norm);
    CHECK(v.column(0)[1] == 1.0);
    CHECK(state.r(0, 0) == 2.0);
    CHECK(state.r(0, 1) == 1.0);
    CHECK(state.t(0, 0) == 1.0);
    CHECK(v.column(1)[0] == 1.0);
    CHECK(v.column(1)[1] == 0.0);
    CHECK(v.lag() == 1);

    v.append(std::vector<double>{1, 1, 1});
    mgs_lvl2(v, state, 2, ledger, LagScaling::independent);
    CHECK(ledger.size() == 2);
    CHECK(state.r(1, 1) == 1.0);
    CHECK(state.t(0, 1) == 0.0);
    CHECK(state.r(0, 2) == 1.0);
    CHECK(state.r(1, 2) == 1.0);
    finalize_lag(v, state, ledger);
    CHECK(v.column(2)[2] == 1.0);
    CHECK(state.r(2, 2) == 1.0);
    CHECK(v.lag() == 0);
  }
}

TEST_CASE("level-2 kernels report breakdown without touching the basis") {
  for (auto form : {ProjectorForm::wy, ProjectorForm::cgs2}) {
    KrylovBasis v(3, 3);
    FactorState state(3, form);
    ReductionLedger ledger;
    v.append(std::vector<double>{0, 0, 0});
    v.set_lag(1);
    v.append(std::vector<double>{1, 1, 0});
    const auto out = form == ProjectorForm::wy
                         ? mgs_lvl2(v, state, 1, ledger, LagScaling::independent)
                         : cgs2_lvl2(v, state, 1, ledger, LagScaling::independent);
    CHECK(out.status == GsStatus::breakdown);
    CHECK(state.active == 0);
    CHECK(v.column(1)[0] == 1.0);
  }
}

TEST_CASE("level-2 precondition checks") {
  KrylovBasis v(3, 3);
  FactorState state(3, ProjectorForm::wy);
  ReductionLedger ledger;
  v.append(std::vector<double>{1, 0, 0});
  CHECK_THROWS_AS(mgs_lvl2(v, state, 0, ledger, LagScaling::independent), DimensionError);
  CHECK_THROWS_AS(mgs_lvl2(v, state, 1, ledger, LagScaling::independent), DimensionError);
  v.append(std::vector<double>{0, 1, 0});
  CHECK_THROWS_AS(cgs2_lvl2(v, state, 1, ledger, LagScaling::independent),
                  std::invalid_argument);
  CHECK_THROWS_AS(finalize_lag(v, state, ledger), DimensionError);
}

TEST_CASE("sync-count law") {
  const auto a = testing::gaussian(25, 8, 77);
  const std::initializer_list<std::pair<QrKernel, std::size_t>> laws = {
      {QrKernel::cgs1, 2}, {QrKernel::cgs2, 3}, {QrKernel::cgs2_two_sync, 2},
      {QrKernel::mgs_wy, 1}, {QrKernel::cgs2_lagged, 2}};
  for (auto [kernel, per_column] : laws) {
    const auto qr = testing::run_qr(a, kernel);
    // Column 0 has an empty basis; lagged kernels close with finalize_lag.
    for (std::size_t j = 1; j < 8; ++j) CHECK(qr.ledger.count_in_iteration(j) == per_column);
  }
  const auto mgs = testing::run_qr(a, QrKernel::mgs_l1);
  for (std::size_t j = 0; j < 8; ++j) CHECK(mgs.ledger.count_in_iteration(j) == j + 1);
}

TEST_CASE("all kernels reproduce a reference QR on well-conditioned input") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto a = testing::with_condition(20, 8, 10.0, 300 + seed);
    const auto [q_ref, r_ref] = testing::reference_qr(a);
    for (auto kernel : {QrKernel::cgs1, QrKernel::cgs2, QrKernel::mgs_l1, QrKernel::mgs_wy,
                        QrKernel::cgs2_two_sync, QrKernel::cgs2_lagged}) {
      CAPTURE(static_cast<int>(kernel));
      const auto qr = testing::run_qr(a, kernel);
      for (Eigen::Index j = 0; j < 8; ++j)
        CHECK((qr.r.col(j) - r_ref.col(j)).norm() <= 1e-12 * r_ref.col(j).norm());
      CHECK((qr.q - q_ref).norm() <= 1e-12 * std::sqrt(8.0));
    }
  }
}

TEST_CASE("orthogonality on ill-conditioned input") {
  const auto a6 = testing::with_condition(30, 10, 1e6, 21);
  const double kappa = testing::condition_number(a6);
  const double mgs = testing::orthogonality_loss_oracle(testing::run_qr(a6, QrKernel::mgs_l1).q);
  const double wy = testing::orthogonality_loss_oracle(testing::run_qr(a6, QrKernel::mgs_wy).q);
  CHECK(mgs <= 100 * eps * kappa);
  CHECK(wy <= 100 * eps * kappa);
  CHECK(wy <= 10 * mgs);
  CHECK(mgs <= 10 * wy);

  const auto a10 = testing::with_condition(30, 10, 1e10, 22);
  CHECK(testing::orthogonality_loss_oracle(testing::run_qr(a10, QrKernel::cgs2_lagged).q) <=
        100 * eps);
  CHECK(testing::orthogonality_loss_oracle(testing::run_qr(a10, QrKernel::cgs2).q) <=
        100 * eps);
}

TEST_CASE("cgs2_lvl2 leaves an already orthogonal column alone") {
  const auto qm = testing::orthonormal(15, 5, 8);
  KrylovBasis v(15, 5);
  v.append(col_of(qm, 0));
  v.set_lag(1);
  FactorState state(5, ProjectorForm::cgs2);
  ReductionLedger ledger;
  for (std::size_t j = 1; j < 4; ++j) {
    v.append(col_of(qm, static_cast<Eigen::Index>(j)));
    cgs2_lvl2(v, state, j, ledger, LagScaling::independent);
  }
  const auto fresh = col_of(qm, 4);
  v.append(fresh);
  const std::size_t before = ledger.size();
  cgs2_lvl2(v, state, 4, ledger, LagScaling::independent);
  CHECK(ledger.size() - before == 2);
  double diff = 0.0;
  for (std::size_t i = 0; i < 15; ++i) diff = std::max(diff, std::abs(v.column(4)[i] - fresh[i]));
  CHECK(diff <= 4 * eps);
}

TEST_CASE("apply_t") {
  SUBCASE("identity at the start") {
    FactorState state(4, ProjectorForm::wy);
    state.active = 1;
    CHECK(apply_t(state, std::vector<double>{2.5}, false) == std::vector<double>{2.5});
    CHECK_THROWS_AS(apply_t(state, std::vector<double>{1, 2}, false), DimensionError);
  }
  SUBCASE("cgs2 form against a dense I - L - L^T") {
    FactorState state(3, ProjectorForm::cgs2);
    state.active = 3;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < i; ++k) state.l(i, k) = 0.1;
    Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
    l(1, 0) = l(2, 0) = l(2, 1) = 0.1;
    const Eigen::Matrix3d t = Eigen::Matrix3d::Identity() - l - l.transpose();
    const std::vector<double> y{1.0, -2.0, 0.5};
    const Eigen::Vector3d ref = t * Eigen::Vector3d(1.0, -2.0, 0.5);
    for (bool transpose : {false, true}) {
      const auto got = apply_t(state, y, transpose);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(got[i] - ref(i)) <= 4 * eps * ref.norm());
    }
  }
  SUBCASE("wy recursion equals the inverse power series") {
    // Overwriting the lagged column with a random vector before each call makes
    // Q^T Q an arbitrary Gram matrix, so T carries a non-trivial L.
    for (std::size_t p = 1; p <= 4; ++p) {
      KrylovBasis v(6, p + 1);
      FactorState state(p + 1, ProjectorForm::wy);
      ReductionLedger ledger;
      const auto rnd = testing::gaussian(6, p + 1, 90 + p);
      v.append(col_of(rnd, 0));
      v.set_lag(1);
      for (std::size_t j = 1; j <= p; ++j) {
        if (j > 1) std::copy_n(col_of(rnd, static_cast<Eigen::Index>(j - 1)).begin(), 6,
                               v.column(j - 1).begin());
        v.append(col_of(rnd, static_cast<Eigen::Index>(j)));
        mgs_lvl2(v, state, j, ledger, LagScaling::independent);
      }
      const auto q = testing::to_eigen(v.leading(p));
      const Eigen::MatrixXd g = q.transpose() * q;
      const Eigen::MatrixXd u = g.triangularView<Eigen::StrictlyUpper>();
      const auto n = static_cast<Eigen::Index>(p);
      Eigen::MatrixXd series = Eigen::MatrixXd::Identity(n, n), term = series;
      for (std::size_t k = 1; k < p; ++k) {
        term = -term * u;
        series += term;
      }
      const Eigen::MatrixXd inverse =
          (Eigen::MatrixXd::Identity(n, n) + u).inverse();
      CHECK((series - inverse).norm() <= 100 * eps * inverse.norm());
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t k = 0; k < p; ++k)
          CHECK(std::abs(state.t(i, k) - series(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(k))) <=
                100 * eps * series.norm());
      std::vector<double> y(p);
      for (std::size_t i = 0; i < p; ++i) y[i] = 1.0 + static_cast<double>(i);
      const Eigen::VectorXd ref = series * testing::to_eigen(y);
      const auto got = apply_t(state, y, false);
      for (std::size_t i = 0; i < p; ++i)
        CHECK(std::abs(got[i] - ref(static_cast<Eigen::Index>(i))) <= 100 * eps * ref.norm());
    }
  }
}

TEST_CASE("wy update equals the dense MGS projector") {
  const auto a = testing::with_condition(12, 7, 1e4, 55);
  for (std::size_t j = 1; j <= 6; ++j) {
    KrylovBasis v(12, j + 1);
    FactorState state(j + 1, ProjectorForm::wy);
    ReductionLedger ledger;
    v.append(col_of(a, 0));
    v.set_lag(1);
    for (std::size_t k = 1; k <= j; ++k) {
      v.append(col_of(a, static_cast<Eigen::Index>(k)));
      if (k < j) mgs_lvl2(v, state, k, ledger, LagScaling::independent);
    }
    const auto input = testing::to_eigen(col_of(a, static_cast<Eigen::Index>(j)));
    mgs_lvl2(v, state, j, ledger, LagScaling::independent);

    const auto q = testing::to_eigen(v.leading(j));
    const auto n = static_cast<Eigen::Index>(j);
    Eigen::MatrixXd t(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k)
        t(i, k) = state.t(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
    // Product of rank-one MGS projections, applied in order.
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(12, 12);
    for (Eigen::Index i = 0; i < n; ++i)
      p = (Eigen::MatrixXd::Identity(12, 12) - q.col(i) * q.col(i).transpose()) * p;
    const Eigen::MatrixXd compact = Eigen::MatrixXd::Identity(12, 12) - q * t.transpose() * q.transpose();
    CHECK((p - compact).norm() <= 100 * eps);

    const Eigen::VectorXd got =
        testing::to_eigen(std::vector<double>(v.column(j).begin(), v.column(j).end()));
    CHECK((got - p * input).norm() <= 100 * eps * input.norm());
  }
}
