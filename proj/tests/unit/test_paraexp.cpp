#include "helpers.hpp"

#include "pebk/baseline.hpp"
#include "pebk/error.hpp"
#include "pebk/metrics.hpp"
#include "pebk/paraexp.hpp"

#include <doctest.h>

#include <cmath>

using namespace pebk;

namespace {

Clock counting_clock() {
  auto ticks = std::make_shared<double>(0.0);
  return [ticks] { return (*ticks)++; };
}

}  // namespace

TEST_CASE("partition") {
  const Partition p = Partition::uniform(0.0, 1.0, 4, 8, NodeKind::chebyshev);
  CHECK(p.p() == 4);
  CHECK(p.boundaries() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(p.grid(2).t_start() == 0.5);
  CHECK(p.grids_from(3).size() == 1);
  CHECK(p.grids_from(4).empty());
  CHECK_THROWS_AS(Partition({0.0, 0.5, 0.5}, 4, NodeKind::uniform), InvalidArgument);
  CHECK_THROWS_AS(Partition::uniform(0.0, 1.0, 0, 4, NodeKind::uniform), InvalidArgument);
}

TEST_CASE("shifted source") {
  const GridSpec grid(50);
  LinearIVP ivp = traveling_pulse_ivp(grid, {1.0, 1e-2});
  SUBCASE("zero initial value gives the source") {
    LinearIVP z = ivp;
    z.u0 = Vector::Zero(50);
    const ShiftedProblem s = shift_to_homogeneous(z);
    CHECK((s.source(0.3) - ivp.g(0.3)).norm() == 0.0);
  }
  SUBCASE("no source gives A u0") {
    LinearIVP h = ivp;
    h.g = nullptr;
    const ShiftedProblem s = shift_to_homogeneous(h);
    CHECK((s.source(0.1) - ivp.a.apply(ivp.u0)).norm() == 0.0);
    CHECK((s.source(0.1) - s.source(0.9)).norm() == 0.0);
  }
  SUBCASE("cancellation") {
    LinearIVP c = ivp;
    const Vector g0 = ivp.g(0.0);
    const Vector au0 = ivp.a.apply(ivp.u0);
    c.g = [g0, au0](double) -> Vector { return -au0; };
    CHECK(shift_to_homogeneous(c).source(0.0).norm() == 0.0);
  }
}

TEST_CASE("source partition sums to the source at every node") {
  const GridSpec grid(40);
  const LinearIVP ivp = traveling_pulse_ivp(grid, {1.0, 1e-2});
  const ShiftedProblem s = shift_to_homogeneous(ivp);
  const Partition part = Partition::uniform(0.0, 1.0, 4, 10, NodeKind::chebyshev);
  std::vector<LowRankSource> pieces;
  for (int j = 0; j < 4; ++j) pieces.push_back(restrict_source(s.source, part, j, FixedRank{10}));
  for (int k = 0; k < 4; ++k) {
    for (double t : part.grid(k).nodes()) {
      Vector sum = Vector::Zero(40);
      for (int j = 0; j < 4; ++j) sum += restricted_value(pieces[j], t, j == 3);
      CHECK((sum - s.source(t)).norm() <= 1e-12 * s.source(t).norm());
    }
  }
}

TEST_CASE("subproblems") {
  const GridSpec grid(100);
  const LinearIVP ivp = pulse_ade_ivp(grid, {1.0, 1e-2});
  const ShiftedProblem s = shift_to_homogeneous(ivp);
  const Partition part = Partition::uniform(0.0, 1.0, 4, 16, NodeKind::chebyshev);
  EbkConfig cfg;
  cfg.tol = 1e-6;
  for (int j = 0; j < 4; ++j) {
    const SubproblemSolution sub =
        solve_subproblem(ivp.a, s.source, part, j, FixedRank{2}, cfg, counting_clock());
    // Causality: v_j starts at T_j from rest.
    CHECK(sub.v.t_start() == part.boundaries()[j]);
    CHECK(sub.v.initial_state().norm() == 0.0);
    CHECK(sub.v.t_end() == 1.0);
    CHECK(sub.tau1 == 1.0);
    CHECK(sub.tau2 == (j + 1 < 4 ? 1.0 : 0.0));
  }
  const SourceFn zero = [](double) { return Vector(Vector::Zero(100)); };
  const SubproblemSolution z = solve_subproblem(ivp.a, zero, part, 1, FixedRank{2}, cfg);
  CHECK(z.v.final_state().norm() == 0.0);
}

TEST_CASE("superposition matches the single-interval solve") {
  const GridSpec grid(200);
  const LinearIVP ivp = pulse_ade_ivp(grid, {1.0, 1e-2});
  EbkConfig cfg;
  cfg.tol = 1e-6;
  ParaexpOptions opt;
  opt.rank = RelativeTolerance{1e-12};
  const ParaexpResult one = paraexp_solve(ivp, Partition::uniform(0.0, 1.0, 1, 16, NodeKind::chebyshev), cfg, opt);
  CHECK(relative_error(one.u.final_state() + ivp.offset, ivp.exact(1.0)) < 5e-2);
  for (int p : {2, 4, 8}) {
    const Partition part = Partition::uniform(0.0, 1.0, p, 16, NodeKind::chebyshev);
    const ParaexpResult r = paraexp_solve(ivp, part, cfg, opt);
    CHECK(relative_error(r.u.final_state(), one.u.final_state()) <= 10 * cfg.tol);
    CHECK(r.tau1.size() == static_cast<std::size_t>(p));
    CHECK(r.tau2.back() == 0.0);
  }
}

TEST_CASE("threaded and emulated runs agree") {
  const GridSpec grid(80);
  const LinearIVP ivp = traveling_pulse_ivp(grid, {1.0, 1e-2}, 1.0);
  const Partition part = Partition::uniform(0.0, 1.0, 4, 20, NodeKind::chebyshev);
  ParaexpOptions a, b;
  b.mode = TimingMode::threaded;
  b.threads = 3;
  const ParaexpResult ra = paraexp_solve(ivp, part, EbkConfig{}, a);
  const ParaexpResult rb = paraexp_solve(ivp, part, EbkConfig{}, b);
  CHECK((ra.u.final_state() - rb.u.final_state()).norm() == 0.0);
}

TEST_CASE("windowed serial solve") {
  const GridSpec grid(100);
  const LinearIVP ivp = traveling_pulse_ivp(grid, {1.0, 1e-2}, 2.0);
  const Partition windows = Partition::uniform(0.0, 2.0, 2, 100, NodeKind::chebyshev);
  EbkConfig cfg;
  cfg.tol = 1e-6;
  const SerialResult r = serial_solve(ivp, windows, cfg, FixedRank{2});
  CHECK(r.stats.size() == 2);
  CHECK(r.u.max_boundary_jump() == 0.0);
  // Same windows, same sources: stepping and superposition agree.
  ParaexpOptions opt;
  opt.rank = FixedRank{2};
  const ParaexpResult par = paraexp_solve(ivp, windows, cfg, opt);
  CHECK(relative_error(r.u.final_state(), par.u.final_state()) <= 10 * cfg.tol);
  const Vector ref = brute_force_solve(ivp, 4000);
  CHECK(relative_error(r.u.final_state(), ref) <= 1e-3);
}
