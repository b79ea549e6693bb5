#include "helpers.hpp"

#include "pebk/error.hpp"
#include "pebk/metrics.hpp"
#include "pebk/wr.hpp"

#include <doctest.h>

#include <cmath>

using namespace pebk;

namespace {

NonlinearIVP as_nonlinear(const LinearIVP& lin) {
  NonlinearIVP ivp;
  ivp.a = lin.a;
  const SourceFn g = lin.g;
  ivp.g = [g](double t, const Vector&) { return g(t); };
  const Index n = lin.a.n();
  ivp.jac_g = [n](const Vector&) { return SparseOperator::zero(n); };
  ivp.u0 = lin.u0;
  ivp.horizon = lin.horizon;
  ivp.exact = lin.exact;
  return ivp;
}

}  // namespace

TEST_CASE("average jacobian") {
  const GridSpec grid(32);
  const Partition part = Partition::uniform(0.0, 0.2, 2, 8, NodeKind::chebyshev);
  SUBCASE("linear g has a constant Jacobian") {
    LinearIVP lin = traveling_pulse_ivp(grid, {1.0, 1e-2}, 0.2);
    NonlinearIVP ivp = as_nonlinear(lin);
    const SparseOperator c = build_ade(grid, {0.3, 0.1});
    ivp.jac_g = [c](const Vector&) { return c; };
    const Waveform u = Waveform::sample(lin.exact, part.grids());
    const PiecewiseJacobian j = average_jacobian(ivp, u, part);
    for (int k = 0; k < 2; ++k) CHECK((j[k].to_dense() - c.to_dense()).norm() < 1e-12);
  }
  SUBCASE("burgers at rest") {
    const NonlinearIVP ivp = burgers_ivp(grid, 1e-2, sawtooth_wave(), ForcingMode::continuum, 0.2);
    const Waveform zero = Waveform::constant(Vector::Zero(32), part.grids());
    CHECK(average_jacobian(ivp, zero, 1).to_dense().norm() == 0.0);
  }
  SUBCASE("trapezoid against a refined quadrature") {
    const NonlinearIVP ivp = burgers_ivp(grid, 1e-2, sawtooth_wave(), ForcingMode::continuum, 0.2);
    const Partition fine = Partition::uniform(0.0, 0.2, 1, 81, NodeKind::uniform);
    std::vector<double> errors;
    std::vector<double> h;
    const Waveform ref_u = Waveform::sample(ivp.exact, fine.grids());
    const Matrix ref = average_jacobian(ivp, ref_u, 0).to_dense();
    for (int s : {6, 11, 21}) {
      const Partition p = Partition::uniform(0.0, 0.2, 1, s, NodeKind::uniform);
      const Waveform u = Waveform::sample(ivp.exact, p.grids());
      errors.push_back((average_jacobian(ivp, u, 0).to_dense() - ref).norm() / ref.norm());
      h.push_back(0.2 / (s - 1));
    }
    CHECK(fit_convergence_order(h, errors) == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("waveform relaxation source") {
  const GridSpec grid(32);
  const Partition part = Partition::uniform(0.0, 0.2, 2, 8, NodeKind::chebyshev);
  const NonlinearIVP ivp = burgers_ivp(grid, 1e-2, sawtooth_wave(), ForcingMode::continuum, 0.2);
  const Waveform u = Waveform::sample(ivp.exact, part.grids());
  const Vector au0 = ivp.a.apply(ivp.u0);
  SUBCASE("Picard") {
    const SourceFn g = wr_source(ivp, u, nullptr, part);
    for (double t : part.grid(1).nodes()) {
      CHECK((g(t) - au0 - ivp.g(t, u.evaluate(t))).norm() < 1e-12);
    }
  }
  SUBCASE("samples agree with the lazy source inside a subinterval") {
    const PiecewiseJacobian j = average_jacobian(ivp, u, part);
    const SourceFn g = wr_source(ivp, u, &j, part);
    const Matrix s = wr_source_samples(ivp, u, &j, 0);
    for (int i = 0; i + 1 < part.grid(0).size(); ++i) {
      CHECK((s.col(i) - g(part.grid(0)[i])).norm() <= 1e-10 * s.col(i).norm());
    }
    // The formula: A u0 + g(t, u_k) + J (u0 - u_k).
    const double t = part.grid(0)[3];
    const Vector expect = au0 + ivp.g(t, u.evaluate(t)) + j[0].apply(Vector(ivp.u0 - u.evaluate(t)));
    CHECK((s.col(3) - expect).norm() <= 1e-10 * expect.norm());
  }
}

TEST_CASE("linear problems need one sweep") {
  const GridSpec grid(100);
  const LinearIVP lin = traveling_pulse_ivp(grid, {1.0, 1e-2}, 1.0);
  const NonlinearIVP ivp = as_nonlinear(lin);
  const Partition part = Partition::uniform(0.0, 1.0, 4, 20, NodeKind::chebyshev);
  EbkConfig ebk;
  ebk.tol = 1e-6;
  WrConfig cfg;
  cfg.rank = FixedRank{2};
  const WrStep step = wr_parallel_step(ivp, Waveform::constant(ivp.u0, part.grids()), part, cfg, ebk);
  ParaexpOptions opt;
  opt.rank = FixedRank{2};
  const ParaexpResult ref = paraexp_solve(lin, part, ebk, opt);
  CHECK(relative_error(step.u.final_state(), ref.u.final_state()) <= 10 * ebk.tol);

  cfg.max_iterations = 3;
  const WrResult r = wr_run(ivp, part, cfg, ebk);
  CHECK(r.history[1].iterate_change <= 10 * ebk.tol);
  CHECK(r.history.size() == 3);
}

TEST_CASE("exact semi-discrete solution is a fixed point") {
  const GridSpec grid(64);
  const NonlinearIVP ivp = burgers_ivp(grid, 1e-2, sawtooth_wave(), ForcingMode::discrete, 0.2);
  const Partition part = Partition::uniform(0.0, 0.2, 2, 32, NodeKind::chebyshev);
  const Waveform exact = Waveform::sample(ivp.exact, part.grids());
  EbkConfig ebk;
  WrConfig cfg;
  cfg.rank = RelativeTolerance{1e-10};
  const WrStep step = wr_parallel_step(ivp, exact, part, cfg, ebk);
  CHECK(waveform_change(step.u, exact) <= 10 * ebk.tol);
}

TEST_CASE("burgers iteration converges and Jacobian beats Picard") {
  const GridSpec grid(128);
  const NonlinearIVP ivp = burgers_ivp(grid, 1e-2, sawtooth_wave(), ForcingMode::continuum, 0.1);
  const Partition part = Partition::uniform(0.0, 0.1, 1, 50, NodeKind::chebyshev);
  EbkConfig ebk;
  WrConfig cfg;
  cfg.max_iterations = 10;
  const WrResult avg = wr_run(ivp, part, cfg, ebk);
  cfg.jacobian = JacobianMode::none;
  const WrResult picard = wr_run(ivp, part, cfg, ebk);
  const double target = 2.0 * avg.history.back().error;
  auto reach = [&](const WrResult& r) {
    for (const auto& h : r.history)
      if (h.error <= target) return h.iteration;
    return 1000;
  };
  CHECK(reach(avg) <= reach(picard));
  // Decrements of the iterate change shrink.
  const auto& h = avg.history;
  CHECK(h.back().iterate_change < h.front().iterate_change);
  CHECK(h[3].iterate_change / h[2].iterate_change < h[1].iterate_change / h[0].iterate_change);
}

TEST_CASE("wr_tol stops early and timing is the per-iteration maximum") {
  const GridSpec grid(64);
  const NonlinearIVP ivp = burgers_ivp(grid, 1e-2, sawtooth_wave(), ForcingMode::continuum, 0.1);
  const Partition part = Partition::uniform(0.0, 0.1, 2, 20, NodeKind::chebyshev);
  WrConfig cfg;
  cfg.max_iterations = 20;
  cfg.wr_tol = 1e-3;
  auto ticks = std::make_shared<double>(0.0);
  cfg.clock = [ticks] { return (*ticks)++; };
  const WrResult r = wr_run(ivp, part, cfg, EbkConfig{});
  CHECK(r.converged);
  CHECK(r.history.size() < 20u);
  double total = 0.0;
  for (const auto& it : r.history) {
    CHECK(it.iter_time_max > 0.0);
    total += it.iter_time_max;
  }
  CHECK(r.total_time == total);
  WrConfig bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
