#include "pebk/baseline.hpp"

#include "pebk/error.hpp"

#include <algorithm>
#include <cmath>

namespace pebk {

long cn_step_count(double length, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("cn_step_count: dt must be > 0");
  if (!(length > 0.0)) throw InvalidArgument("cn_step_count: length must be > 0");
  const double ratio = length / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return std::max(1L, static_cast<long>(nearest));
  }
  return static_cast<long>(std::ceil(ratio));
}

CnResult cn_solve(const SparseOperator& a, const SourceFn& g, const Vector& u_start,
                  const std::vector<SampleGrid>& grids, double dt) {
  if (grids.empty()) throw InvalidArgument("cn_solve: no output grids");
  if (u_start.size() != a.n()) throw InvalidArgument("cn_solve: u_start has wrong size");
  const Index n = a.n();
  const double t0 = grids.front().t_start();
  const double t1 = grids.back().t_end();
  CnResult out;
  out.steps = cn_step_count(t1 - t0, dt);
  const double h = (t1 - t0) / static_cast<double>(out.steps);
  const ShiftedFactorization fac(a, 0.5 * h);
  auto source = [&](double t) -> Vector { return g ? g(t) : Vector::Zero(n); };

  // Output nodes in order, with their grid and position.
  std::vector<Matrix> states;
  for (const auto& grid : grids) states.emplace_back(n, grid.size());
  std::size_t gi = 0;
  int ni = 0;
  auto advance = [&] {
    if (++ni == grids[gi].size()) {
      ni = 0;
      ++gi;
      // The first node of the next grid repeats the last node of this one.
      if (gi < grids.size()) {
        states[gi].col(0) = states[gi - 1].col(grids[gi - 1].size() - 1);
        ni = 1;
      }
    }
  };
  auto pending = [&] { return gi < grids.size() ? grids[gi][ni] : t1 + 1.0; };

  Vector u = u_start;
  Vector gu = source(t0);
  double t = t0;
  while (gi < grids.size() && pending() <= t0) {
    states[gi].col(ni) = u;
    advance();
  }
  for (long k = 0; k < out.steps; ++k) {
    const double tn = k + 1 == out.steps ? t1 : t0 + static_cast<double>(k + 1) * h;
    const Vector gn = source(tn);
    const Vector au = a.apply(u);
    const Vector rhs = u + 0.5 * h * au + 0.5 * h * (gu + gn);
    Vector un = fac.solve(rhs);
    if (!un.allFinite()) throw SolverError("cn_solve: non-finite state");
    if (gi < grids.size() && pending() <= tn + 1e-12 * std::max(1.0, std::abs(tn))) {
      const Vector du = au + gu;
      const Vector dun = a.apply(un) + gn;
      const double step = tn - t;
      while (gi < grids.size() && pending() <= tn + 1e-12 * std::max(1.0, std::abs(tn))) {
        const double s = std::clamp((pending() - t) / step, 0.0, 1.0);
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        states[gi].col(ni) = h00 * u + h10 * step * du + h01 * un + h11 * step * dun;
        advance();
      }
    }
    u = std::move(un);
    gu = gn;
    t = tn;
  }
  if (gi < grids.size()) throw SolverError("cn_solve: output nodes beyond the final time");

  out.u = Waveform(n);
  for (std::size_t i = 0; i < grids.size(); ++i) out.u.append_dense(grids[i], std::move(states[i]));
  return out;
}

double ParaexpCnResult::max_tau1() const {
  return tau1.empty() ? 0.0 : *std::max_element(tau1.begin(), tau1.end());
}

double ParaexpCnResult::max_tau2() const {
  return tau2.empty() ? 0.0 : *std::max_element(tau2.begin(), tau2.end());
}

ParaexpCnResult paraexp_cn_solve(const LinearIVP& ivp, const Partition& partition, double dt,
                                 const EbkConfig& cfg, const ParaexpOptions& options) {
  cfg.validate();
  if (!(dt > 0.0)) throw InvalidArgument("paraexp_cn_solve: dt must be > 0");
  const Clock clock = options.clock ? options.clock : steady_clock();
  const ShiftedProblem shifted = shift_to_homogeneous(ivp);
  const int p = partition.p();
  const Index n = ivp.a.n();
  ParaexpCnResult out;
  out.dt_parallel = dt / std::pow(static_cast<double>(p), 0.25);
  out.tau1.assign(static_cast<std::size_t>(p), 0.0);
  out.tau2.assign(static_cast<std::size_t>(p), 0.0);
  out.steps.assign(static_cast<std::size_t>(p), 0);
  std::vector<Waveform> parts(static_cast<std::size_t>(p));
  const int threads = options.threads > 0 ? options.threads : default_thread_count();

  fork_join(p, options.mode, threads, [&](int j) {
    const double start = clock();
    CnResult local = cn_solve(ivp.a, shifted.source, Vector::Zero(n), {partition.grid(j)},
                              out.dt_parallel);
    const double mid = clock();
    out.tau1[j] = mid - start;
    out.steps[j] = local.steps;
    Waveform v = std::move(local.u);
    if (j + 1 < p) {
      const ShiftedFactorization fac(ivp.a, cfg.shift_for(partition.grid(j).length()));
      EbkResult later = propagate_homogeneous(fac, v.final_state(), partition.grids_from(j + 1), cfg);
      for (const auto& seg : later.waveform.segments()) v.append_factored(seg.grid, seg.basis, seg.coeffs);
      out.tau2[j] = clock() - mid;
    }
    parts[j] = std::move(v);
  });

  std::vector<const Waveform*> ptrs;
  for (const auto& w : parts) ptrs.push_back(&w);
  out.u = superpose(shifted.offset, partition, ptrs);
  return out;
}

namespace {

template <class Rhs>
Vector rk4(const Rhs& f, Vector u, double horizon, long n_steps) {
  if (n_steps < 1) throw InvalidArgument("brute_force_solve: n_steps must be >= 1");
  const double h = horizon / static_cast<double>(n_steps);
  for (long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Vector k1 = f(t, u);
    const Vector k2 = f(t + 0.5 * h, u + 0.5 * h * k1);
    const Vector k3 = f(t + 0.5 * h, u + 0.5 * h * k2);
    const Vector k4 = f(t + h, u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

}  // namespace

Vector brute_force_solve(const LinearIVP& ivp, long n_steps) {
  const auto f = [&](double t, const Vector& u) -> Vector {
    Vector du = ivp.a.apply(u);
    if (ivp.g) du += ivp.g(t);
    return du;
  };
  return rk4(f, ivp.u0, ivp.horizon, n_steps);
}

Vector brute_force_solve(const NonlinearIVP& ivp, long n_steps) {
  const auto f = [&](double t, const Vector& u) -> Vector {
    Vector du = ivp.a.apply(u);
    du += ivp.g(t, u);
    return du;
  };
  return rk4(f, ivp.u0, ivp.horizon, n_steps);
}

Vector brute_force_expm(const LinearIVP& ivp) {
  if (ivp.g) throw InvalidArgument("brute_force_expm: only for homogeneous problems");
  if (ivp.a.n() > 256) throw InvalidArgument("brute_force_expm: dense path limited to n <= 256");
  return dense_expm(ivp.horizon * ivp.a.to_dense()) * ivp.u0;
}

}  // namespace pebk
