#include "helpers.hpp"

#include "pebk/baseline.hpp"
#include "pebk/ebk.hpp"
#include "pebk/error.hpp"
#include "pebk/metrics.hpp"
#include "pebk/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace pebk;
using pebk::testing::random_matrix;
using pebk::testing::random_stable_operator;
using pebk::testing::random_vector;

namespace {

LowRankSource constant_source(const Vector& c, const SampleGrid& grid) {
  return build_low_rank(c.replicate(1, grid.size()), grid, FixedRank{1});
}

}  // namespace

TEST_CASE("block Arnoldi invariants") {
  std::mt19937 rng(31);
  const GridSpec grid(128);
  const SparseOperator diffusion = build_ade(grid, {0.0, 1e-2});
  const SparseOperator a = random_stable_operator(150, rng);
  for (const SparseOperator* op : {&diffusion, &a}) {
    const ShiftedFactorization fac(*op, 0.05);
    BlockKrylovState st(fac, random_matrix(op->n(), 3, rng), 10);
    CHECK(st.blocks() == 0);
    while (st.blocks() < 10 && !st.invariant()) {
      st.expand();
      CHECK(st.orthogonality_error() <= 1e-10);
      CHECK(st.arnoldi_error() <= 1e-10);
    }
    CHECK(st.dim() == 30);
    CHECK(st.extended_hessenberg().rows() == st.dim() + st.next_width());
  }
}

TEST_CASE("block Arnoldi drops dependent columns") {
  std::mt19937 rng(32);
  const SparseOperator a = random_stable_operator(40, rng);
  const ShiftedFactorization fac(a, 0.1);
  Matrix start = random_matrix(40, 3, rng);
  start.col(2) = start.col(0) - 2.0 * start.col(1);
  BlockKrylovState st(fac, start, 4);
  CHECK(st.next_width() == 2);
  CHECK((st.next_block() * st.start_coefficients() - start).norm() < 1e-12 * start.norm());
}

TEST_CASE("invariant start block") {
  // Eigenvectors of a diagonal operator: the first block spans an invariant subspace.
  std::vector<SparseOperator::Triplet> t;
  for (Index i = 0; i < 10; ++i) t.push_back({i, i, -1.0 - i});
  const SparseOperator a = SparseOperator::from_triplets(10, t);
  const SampleGrid grid(0.0, 1.0, 8, NodeKind::chebyshev);
  Matrix samples = Matrix::Zero(10, grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    samples(2, i) = 1.0;
    samples(7, i) = grid[i];
  }
  const EbkResult r = ebk_solve(a, build_low_rank(samples, grid, FixedRank{2}), EbkConfig{});
  CHECK(r.stats.invariant);
  CHECK(r.stats.blocks == 1);
  CHECK(r.stats.residual <= 1e-12);
  const Vector y = r.waveform.final_state();
  CHECK(y[2] == doctest::Approx((1.0 - std::exp(-3.0)) / 3.0).epsilon(1e-12));
  CHECK(y[7] == doctest::Approx((7.0 + std::exp(-8.0)) / 64.0).epsilon(1e-12));
}

TEST_CASE("closed-form constant sources") {
  const SampleGrid grid(0.5, 1.25, 10, NodeKind::chebyshev);
  const Vector c = Vector::LinSpaced(6, 1.0, 2.0);
  SUBCASE("A = 0") {
    const EbkResult r = ebk_solve(SparseOperator::zero(6), constant_source(c, grid), EbkConfig{});
    for (int i = 0; i < grid.size(); ++i) {
      const Vector expect = c * (grid[i] - grid.t_start());
      CHECK((r.waveform.state(0, i) - expect).norm() <= 1e-12 * c.norm());
    }
  }
  SUBCASE("diagonal A") {
    std::vector<SparseOperator::Triplet> t;
    for (Index i = 0; i < 6; ++i) t.push_back({i, i, -0.5 * (i + 1)});
    const SparseOperator a = SparseOperator::from_triplets(6, t);
    EbkConfig cfg;
    cfg.tol = 1e-10;
    const EbkResult r = ebk_solve(a, constant_source(c, grid), cfg);
    for (int k = 0; k < grid.size(); ++k) {
      const double dt = grid[k] - grid.t_start();
      for (Index i = 0; i < 6; ++i) {
        const double lam = -0.5 * (i + 1);
        CHECK(r.waveform.state(0, k)[i] ==
              doctest::Approx(std::expm1(lam * dt) / lam * c[i]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("globally cubic source is integrated exactly") {
  std::mt19937 rng(33);
  const SparseOperator a = random_stable_operator(4, rng, 2);
  Matrix coef = random_matrix(4, 4, rng);  // column k multiplies (t - t0)^k
  const double t0 = 0.2, len = 0.8;
  const SampleGrid grid(t0, t0 + len, 9, NodeKind::chebyshev);
  const SourceFn g = [&](double t) -> Vector {
    const double s = t - t0;
    return coef.col(0) + s * coef.col(1) + s * s * coef.col(2) + s * s * s * coef.col(3);
  };
  EbkConfig cfg;
  cfg.tol = 1e-12;
  const EbkResult r = ebk_solve(a, build_low_rank(sample_source(g, grid), grid, FixedRank{4}), cfg);
  // y(T) = sum_k k! T^{k+1} phi_{k+1}(T A) c_k
  const auto phi = phi_functions(len * a.to_dense(), 4);
  Vector expect = Vector::Zero(4);
  double fact = 1.0;
  for (int k = 0; k < 4; ++k) {
    if (k > 0) fact *= k;
    expect += fact * std::pow(len, k + 1) * phi[k + 1] * coef.col(k);
  }
  CHECK((r.waveform.final_state() - expect).norm() <= 1e-11 * expect.norm());
}

TEST_CASE("homogeneous propagation") {
  const GridSpec grid(64);
  const SparseOperator a = build_ade(grid, {1.0, 1e-2});
  const std::vector<SampleGrid> grids{SampleGrid(0.0, 0.5, 6, NodeKind::chebyshev),
                                      SampleGrid(0.5, 1.0, 6, NodeKind::chebyshev)};
  EbkConfig cfg;
  SUBCASE("zero vector") {
    const EbkResult r = propagate_homogeneous(a, Vector::Zero(64), grids, cfg);
    CHECK(r.waveform.final_state().norm() == 0.0);
  }
  SUBCASE("zero operator") {
    const Vector v = Vector::LinSpaced(64, 0.0, 1.0);
    const EbkResult r = propagate_homogeneous(SparseOperator::zero(64), v, grids, cfg);
    for (std::size_t s = 0; s < 2; ++s)
      for (int i = 0; i < 6; ++i) CHECK((r.waveform.state(s, i) - v).norm() <= 1e-12 * v.norm());
  }
  SUBCASE("dense exponential oracle") {
    for (double tol : {1e-4, 1e-8}) {
      cfg.tol = tol;
      Vector v(64);
      const Vector x = grid.points();
      for (Index i = 0; i < 64; ++i) v[i] = std::pow(std::sin(M_PI * x[i]), 20);
      const EbkResult r = propagate_homogeneous(a, v, grids, cfg);
      for (double t : {grids[0][2], 0.5, grids[1][3], 1.0}) {
        const Vector expect = dense_expm(t * a.to_dense()) * v;
        CHECK(relative_error(r.waveform.evaluate(t), expect) <= 10 * tol);
      }
    }
  }
}

TEST_CASE("restarting") {
  const GridSpec grid(200);
  const SparseOperator a = build_ade(grid, {1.0, 1e-2});
  const Vector x = grid.points();
  const SampleGrid sg(0.0, 0.5, 40, NodeKind::chebyshev);
  const SourceFn g = [&](double t) {
    Vector v(x.size());
    for (Index i = 0; i < x.size(); ++i) v[i] = std::exp(-200.0 * std::pow(x[i] - 0.4 - 0.3 * t, 2));
    return v;
  };
  const LowRankSource src = build_low_rank(sample_source(g, sg), sg, RelativeTolerance{1e-10});
  EbkConfig shortc, longc;
  shortc.tol = longc.tol = 1e-6;
  shortc.restart_length = 3;
  longc.restart_length = 1000;
  const EbkResult ra = ebk_solve(a, src, shortc);
  const EbkResult rb = ebk_solve(a, src, longc);
  CHECK(ra.stats.cycles > 1);
  CHECK(rb.stats.cycles == 1);
  CHECK(relative_error(ra.waveform.final_state(), rb.waveform.final_state()) <= 10 * shortc.tol);
  REQUIRE(ra.stats.restart_residual.size() + 1 == ra.stats.cycle_end_residual.size());
  for (std::size_t i = 0; i < ra.stats.restart_residual.size(); ++i) {
    CHECK(ra.stats.restart_residual[i] ==
          doctest::Approx(ra.stats.cycle_end_residual[i]).epsilon(1e-8));
  }
  CHECK(ra.stats.residual <= shortc.tol);

  EbkConfig tiny = shortc;
  tiny.max_krylov_dim = src.rank() * 2;
  CHECK_THROWS_AS(ebk_solve(a, src, tiny), KrylovBudgetExceeded);
}

TEST_CASE("residual decreases for pure diffusion") {
  // The residual is a maximum over the sample times and may rise for a
  // block or two; over any three consecutive blocks it must fall.
  const GridSpec grid(128);
  const SparseOperator a = build_ade(grid, {0.0, 1e-2});
  const Vector x = grid.points();
  for (double width : {100.0, 400.0, 1600.0}) {
    Vector c(128);
    for (Index i = 0; i < 128; ++i) c[i] = std::exp(-width * (x[i] - 0.5) * (x[i] - 0.5));
    for (int s : {2, 16}) {
      const SampleGrid sg(0.0, 0.5, s, NodeKind::chebyshev);
      EbkConfig cfg;
      cfg.tol = 1e-9;
      cfg.restart_length = 200;
      const EbkResult r = ebk_solve(a, constant_source(c, sg), cfg);
      const EbkResult h = propagate_homogeneous(a, c, {sg}, cfg);
      for (const auto* hist : {&r.stats.residual_history, &h.stats.residual_history}) {
        REQUIRE(hist->size() > 4);
        for (std::size_t i = 3; i < hist->size(); ++i) CHECK((*hist)[i] < (*hist)[i - 3]);
      }
    }
  }
}

TEST_CASE("oracle equivalence on random stable systems") {
  std::mt19937 rng(35);
  for (int inst = 0; inst < 6; ++inst) {
    const Index n = 16 + 8 * inst;
    LinearIVP ivp;
    ivp.a = random_stable_operator(n, rng);
    ivp.u0 = Vector::Zero(n);
    const Vector p = random_vector(n, rng), q = random_vector(n, rng);
    ivp.g = [p, q](double t) -> Vector { return p * std::cos(3 * t) + q * t; };
    ivp.horizon = 1.0;
    const Vector ref = brute_force_solve(ivp, 20000);
    const SampleGrid sg(0.0, 1.0, 40, NodeKind::chebyshev);
    for (double tol : {1e-4, 1e-6}) {
      EbkConfig cfg;
      cfg.tol = tol;
      const EbkResult r = ebk_solve(ivp.a, build_low_rank(sample_source(ivp.g, sg), sg,
                                                          RelativeTolerance{1e-13}),
                                    cfg);
      CHECK(relative_error(r.waveform.final_state(), ref) <= 10 * tol);
    }
  }
}

TEST_CASE("config validation") {
  EbkConfig c;
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = EbkConfig{};
  c.restart_length = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = EbkConfig{};
  CHECK(c.shift_for(2.0) == doctest::Approx(0.2));
  c.gamma = 0.05;
  CHECK(c.shift_for(2.0) == 0.05);
}
