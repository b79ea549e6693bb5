#include "helpers.hpp"

#include "pebk/error.hpp"
#include "pebk/lowrank.hpp"
#include "pebk/spline.hpp"
#include "pebk/waveform.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace pebk;
using pebk::testing::random_matrix;
using pebk::testing::random_vector;

namespace {

Matrix cubic_rows(const std::vector<double>& t) {
  Matrix v(2, static_cast<Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = t[i];
    v(0, static_cast<Index>(i)) = 1.0 - 2.0 * x + 0.5 * x * x * x;
    v(1, static_cast<Index>(i)) = 3.0 * x * x - x * x * x;
  }
  return v;
}

}  // namespace

TEST_CASE("sample grid") {
  const SampleGrid c(0.0, 1.0, 5, NodeKind::chebyshev);
  CHECK(c.t_start() == 0.0);
  CHECK(c.t_end() == 1.0);
  CHECK(c[2] == doctest::Approx(0.5));
  for (int i = 1; i < c.size(); ++i) CHECK(c[i] > c[i - 1]);
  const SampleGrid u(1.0, 2.0, 5, NodeKind::uniform);
  CHECK(u[1] == doctest::Approx(1.25));
  CHECK_THROWS_AS(SampleGrid(0.0, 1.0, 1, NodeKind::uniform), InvalidArgument);
  CHECK_THROWS_AS(SampleGrid::from_nodes({0.0, 0.5, 0.5, 1.0}), InvalidArgument);
}

TEST_CASE("cubic spline reproduces cubics") {
  for (auto kind : {NodeKind::chebyshev, NodeKind::uniform}) {
    const SampleGrid g(-0.3, 1.7, 9, kind);
    const CubicSpline s(g.nodes(), cubic_rows(g.nodes()));
    for (double t : g.midpoints()) {
      CHECK((s(t) - cubic_rows({t}).col(0)).norm() < 1e-12);
    }
    CHECK_THROWS_AS(s(1.8), InvalidArgument);
  }
  // Two and three nodes: linear interpolant and parabola.
  const CubicSpline line({0.0, 2.0}, Matrix::Constant(1, 2, 1.0).cwiseProduct(Matrix{{1.0, 5.0}}));
  CHECK(line(0.5)[0] == doctest::Approx(2.0));
  const CubicSpline par({0.0, 1.0, 2.0}, Matrix{{0.0, 1.0, 4.0}});
  CHECK(par(1.5)[0] == doctest::Approx(2.25));
}

TEST_CASE("low-rank source") {
  const SampleGrid grid(0.0, 0.5, 12, NodeKind::chebyshev);
  std::mt19937 rng(4);

  SUBCASE("constant source has rank one") {
    const Vector c = random_vector(30, rng);
    const Matrix samples = c.replicate(1, grid.size());
    const LowRankSource src = build_low_rank(samples, grid, FixedRank{3});
    CHECK(src.singular_values()[1] <= 1e-12 * src.singular_values()[0]);
    for (double t : {0.0, 0.13, 0.5}) CHECK((src.evaluate(t) - c).norm() < 1e-12 * c.norm());
    const SourceFn f = [c](double) { return c; };
    CHECK(approximation_error(src, f, grid.midpoints()) < 1e-12);
  }
  SUBCASE("rank-1 product") {
    const Vector u = random_vector(40, rng);
    const Vector w = random_vector(grid.size(), rng);
    const Matrix g = u * w.transpose();
    const LowRankSource src = build_low_rank(g, grid, RelativeTolerance{1e-10});
    CHECK(src.rank() == 1);
    CHECK((src.node_values() - g).norm() < 1e-12 * g.norm());
  }
  SUBCASE("node interpolation and orthonormality") {
    const Matrix g = random_matrix(50, grid.size(), rng);
    for (int m : {1, 3, 6, 12}) {
      const LowRankSource src = build_low_rank(g, grid, FixedRank{m});
      CHECK(src.rank() == m);
      CHECK((src.basis().transpose() * src.basis() - Matrix::Identity(m, m)).norm() < 1e-12);
      const ThinSVD svd = thin_svd(g);
      const Matrix rec = svd.u.leftCols(m) * svd.singular_values.head(m).asDiagonal() *
                         svd.v.leftCols(m).transpose();
      for (int i = 0; i < grid.size(); ++i) {
        CHECK((src.evaluate(grid[i]) - rec.col(i)).norm() < 1e-12 * g.norm());
      }
    }
  }
  SUBCASE("cubic in time is exact between nodes") {
    const Vector a = random_vector(20, rng), b = random_vector(20, rng);
    const SourceFn f = [&](double t) -> Vector { return a * (1.0 + t * t * t) + b * t; };
    const LowRankSource src = build_low_rank(sample_source(f, grid), grid, FixedRank{2});
    for (double t : grid.midpoints()) CHECK((src.evaluate(t) - f(t)).norm() < 1e-12 * f(t).norm());
  }
  SUBCASE("error decreases with rank") {
    const SourceFn f = [](double t) {
      Vector v(64);
      for (Index i = 0; i < 64; ++i) v[i] = std::exp(-std::pow(i / 64.0 - t, 2) * 40.0);
      return v;
    };
    const Matrix s = sample_source(f, grid);
    double prev = INFINITY;
    for (int m = 1; m <= 8; ++m) {
      const double e = approximation_error(build_low_rank(s, grid, FixedRank{m}), f, grid.midpoints());
      CHECK(e <= prev * (1.0 + 1e-9));
      prev = e;
    }
  }
  SUBCASE("non-finite sample names the node") {
    const SourceFn bad = [](double t) { return Vector::Constant(3, t > 0.2 ? NAN : 1.0); };
    CHECK_THROWS_AS(sample_source(bad, grid), InvalidArgument);
  }
  SUBCASE("outside the subinterval") {
    const LowRankSource src = build_low_rank(random_matrix(5, grid.size(), rng), grid, FixedRank{2});
    CHECK_THROWS_AS(src.evaluate(0.6), InvalidArgument);
  }
}

TEST_CASE("singular value decay") {
  SUBCASE("linear in time is rank two") {
    std::mt19937 rng(8);
    const Vector a = random_vector(30, rng), b = random_vector(30, rng);
    const auto rows = decay_report([&](double t) -> Vector { return a + t * b; },
                                   SampleGrid(0.0, 0.4, 16, NodeKind::chebyshev), 2);
    double s1 = 0.0;
    for (const auto& r : rows) {
      if (r.j == 1) s1 = r.sigma;
      if (r.j == 3) CHECK(r.sigma <= 1e-10 * s1);
    }
  }
  SUBCASE("csv") {
    std::ostringstream out;
    write_decay_csv(out, {{0.1, 1, 2.5}});
    CHECK(out.str() == "dT,j,sigma\n1.000000e-01,1,2.500000e+00\n");
  }
}

TEST_CASE("waveform") {
  const std::vector<SampleGrid> grids{SampleGrid(0.0, 1.0, 5, NodeKind::chebyshev),
                                      SampleGrid(1.0, 2.0, 5, NodeKind::chebyshev)};
  const SourceFn f = [](double t) { return Vector{{t, t * t, 1.0 - t * t * t}}; };
  Waveform w = Waveform::sample(f, grids);
  CHECK(w.segment_count() == 2);
  CHECK(w.t_start() == 0.0);
  CHECK(w.t_end() == 2.0);
  CHECK((w.final_state() - f(2.0)).norm() < 1e-15);
  CHECK((w.evaluate(0.37) - f(0.37)).norm() < 1e-12);
  CHECK((w.evaluate(1.61) - f(1.61)).norm() < 1e-12);
  CHECK(w.max_boundary_jump() < 1e-15);

  // Factored segments evaluate like their dense counterparts.
  auto basis = std::make_shared<const Matrix>(Matrix::Identity(3, 3) * 2.0);
  Waveform fac(3);
  fac.append_factored(grids[0], basis, 0.5 * w.states(0));
  CHECK((fac.states(0) - w.states(0)).norm() < 1e-15);

  // Suffix accumulation.
  Waveform tail = Waveform::constant(Vector::Ones(3), {grids[1]});
  Waveform sum = w;
  sum.accumulate(tail);
  CHECK((sum.states(0) - w.states(0)).norm() == 0.0);
  CHECK((sum.states(1) - w.states(1) - Matrix::Ones(3, 5)).norm() < 1e-15);

  Waveform gap(3);
  gap.append_dense(grids[0], w.states(0));
  CHECK_THROWS_AS(gap.append_dense(SampleGrid(1.5, 2.0, 3, NodeKind::uniform), Matrix::Zero(3, 3)),
                  InvalidArgument);
}
