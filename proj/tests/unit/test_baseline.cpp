#include "helpers.hpp"

#include "pebk/baseline.hpp"
#include "pebk/error.hpp"
#include "pebk/metrics.hpp"

#include <doctest.h>

#include <cmath>

using namespace pebk;

TEST_CASE("step counts") {
  CHECK(cn_step_count(1.0, 1e-3) == 1000);
  CHECK(cn_step_count(0.1, 1e-3) == 100);
  CHECK(cn_step_count(1.0, 0.3) == 4);
  for (int p : {2, 4, 8, 16, 32}) {
    const double dt = 1e-3 / std::pow(p, 0.25);
    const long expect = static_cast<long>(std::ceil((1.0 / dt) - 1e-9));
    CHECK(cn_step_count(1.0, dt) == expect);
  }
}

TEST_CASE("crank-nicolson closed forms") {
  const std::vector<SampleGrid> grids{SampleGrid(0.0, 1.0, 3, NodeKind::uniform)};
  SUBCASE("A = 0 is the trapezoidal rule") {
    const SourceFn g = [](double t) { return Vector::Constant(1, t * t); };
    const CnResult r = cn_solve(SparseOperator::zero(1), g, Vector::Zero(1), grids, 0.25);
    double trap = 0.0;
    for (int k = 0; k < 4; ++k) trap += 0.125 * (std::pow(0.25 * k, 2) + std::pow(0.25 * (k + 1), 2));
    CHECK(r.u.final_state()[0] == doctest::Approx(trap).epsilon(1e-14));
  }
  SUBCASE("scalar stability function") {
    const double lam = -3.0, dt = 1.0;
    const auto a = SparseOperator::from_triplets(1, {{0, 0, lam}});
    const CnResult r = cn_solve(a, nullptr, Vector::Ones(1), grids, dt);
    CHECK(r.steps == 1);
    CHECK(r.u.final_state()[0] ==
          doctest::Approx((1 + lam * dt / 2) / (1 - lam * dt / 2)).epsilon(1e-14));
  }
}

TEST_CASE("crank-nicolson is second order") {
  const GridSpec grid(100);
  const LinearIVP ivp = pulse_ade_ivp(grid, {1.0, 1e-2}, 0.5);
  const std::vector<SampleGrid> grids{SampleGrid(0.0, 0.5, 2, NodeKind::uniform)};
  // Reference: the exact semi-discrete solution, so only time error remains.
  const Vector ref = dense_expm(0.5 * ivp.a.to_dense()) * ivp.offset;
  std::vector<double> h, e;
  for (double dt : {2e-2, 1e-2, 5e-3, 2.5e-3}) {
    const CnResult r = cn_solve(ivp.a, ivp.g, ivp.u0, grids, dt);
    h.push_back(dt);
    e.push_back(relative_error(r.u.final_state() + ivp.offset, ref));
  }
  CHECK(fit_convergence_order(h, e) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Paraexp with Crank-Nicolson legs") {
  const GridSpec grid(100);
  const LinearIVP ivp = traveling_pulse_ivp(grid, {1.0, 1e-2}, 1.0);
  const double dt = 1e-2;
  SUBCASE("P = 1 is plain Crank-Nicolson") {
    const Partition part = Partition::uniform(0.0, 1.0, 1, 10, NodeKind::chebyshev);
    const ParaexpCnResult r = paraexp_cn_solve(ivp, part, dt, EbkConfig{});
    const CnResult serial = cn_solve(ivp.a, ivp.g, ivp.u0, part.grids(), dt);
    CHECK(relative_error(r.u.final_state(), serial.u.final_state()) < 1e-12);
  }
  SUBCASE("step counts and accuracy") {
    const CnResult serial = cn_solve(ivp.a, ivp.g, ivp.u0,
                                     {SampleGrid(0.0, 1.0, 2, NodeKind::uniform)}, dt);
    const double serial_err = relative_error(serial.u.final_state(), ivp.exact(1.0));
    for (int p : {2, 4, 8}) {
      const Partition part = Partition::uniform(0.0, 1.0, p, 10, NodeKind::chebyshev);
      EbkConfig cfg;
      cfg.tol = 1e-8;
      const ParaexpCnResult r = paraexp_cn_solve(ivp, part, dt, cfg);
      const long expect = static_cast<long>(std::ceil((1.0 / p) / dt * std::pow(p, 0.25) - 1e-9));
      for (long s : r.steps) CHECK(s == expect);
      const double err = relative_error(r.u.final_state(), ivp.exact(1.0));
      CHECK(err <= serial_err * 1.5);
    }
  }
}

TEST_CASE("brute-force oracles") {
  std::mt19937 rng(41);
  LinearIVP ivp;
  ivp.a = pebk::testing::random_stable_operator(16, rng);
  ivp.u0 = pebk::testing::random_vector(16, rng);
  ivp.horizon = 1.0;
  const Vector expm = brute_force_expm(ivp);
  CHECK(relative_error(brute_force_solve(ivp, 20000), expm) <= 1e-10);
  const double e1 = relative_error(brute_force_solve(ivp, 100), expm);
  const double e2 = relative_error(brute_force_solve(ivp, 200), expm);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
  ivp.g = [](double) { return Vector(Vector::Ones(16)); };
  CHECK_THROWS_AS(brute_force_expm(ivp), InvalidArgument);
}

TEST_CASE("metrics") {
  const Vector a{{1.0, 0.0}}, b{{0.0, 1.0}};
  CHECK(relative_error(a, a) == 0.0);
  CHECK(relative_error(2.0 * a, a) == 1.0);
  CHECK(relative_error(a, b) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(relative_error(a, Vector::Zero(2)), InvalidArgument);
  const std::vector<double> h{0.1, 0.05, 0.025};
  CHECK(fit_convergence_order(h, std::vector<double>{0.03, 0.0075, 0.001875}) ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit_convergence_order(h, std::vector<double>{0.3, 0.15, 0.075}) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(fit_convergence_order(h, std::vector<double>{0.3, 0.0, 0.075}), InvalidArgument);
  CHECK_THROWS_AS(fit_convergence_order(std::vector<double>{0.1, 0.05}, std::vector<double>{1.0, 0.5}),
                  InvalidArgument);
}
