#include "pebk/wr.hpp"

#include "pebk/error.hpp"
#include "pebk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace pebk {

void WrConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("WrConfig: K must be >= 1");
  if (wr_tol < 0.0) throw InvalidArgument("WrConfig: wr_tol must be >= 0");
  if (!(divergence_factor > 1.0)) throw InvalidArgument("WrConfig: divergence_factor must be > 1");
}

namespace {

void check_grids(const Waveform& u, const Partition& partition) {
  if (u.segment_count() != static_cast<std::size_t>(partition.p())) {
    throw InvalidArgument("wr: iterate and partition have different subintervals");
  }
  for (int j = 0; j < partition.p(); ++j) {
    if (!(u.segment(j).grid == partition.grid(j))) {
      throw InvalidArgument("wr: iterate and partition have different sample grids");
    }
  }
}

}  // namespace

SparseOperator average_jacobian(const NonlinearIVP& ivp, const Waveform& u_k, int segment) {
  const SampleGrid& grid = u_k.segment(segment).grid;
  const Matrix states = u_k.states(segment);
  const int s = grid.size();
  std::vector<SparseOperator> ops;
  std::vector<double> weights;
  ops.reserve(s);
  for (int i = 0; i < s; ++i) {
    ops.push_back(ivp.jac_g(states.col(i)));
    const double left = i > 0 ? grid[i] - grid[i - 1] : 0.0;
    const double right = i + 1 < s ? grid[i + 1] - grid[i] : 0.0;
    weights.push_back(0.5 * (left + right) / grid.length());
  }
  return SparseOperator::weighted_sum(ops, weights);
}

PiecewiseJacobian average_jacobian(const NonlinearIVP& ivp, const Waveform& u_k,
                                   const Partition& partition) {
  check_grids(u_k, partition);
  std::vector<SparseOperator> parts;
  for (int j = 0; j < partition.p(); ++j) parts.push_back(average_jacobian(ivp, u_k, j));
  return PiecewiseJacobian(std::move(parts));
}

SourceFn wr_source(const NonlinearIVP& ivp, const Waveform& u_k, const PiecewiseJacobian* jac,
                   const Partition& partition) {
  check_grids(u_k, partition);
  std::optional<PiecewiseJacobian> j_copy;
  if (jac != nullptr) j_copy = *jac;
  const Vector au0 = ivp.a.apply(ivp.u0);
  return [g = ivp.g, u0 = ivp.u0, au0, u_k, j_copy, b = partition.boundaries()](double t) -> Vector {
    const Vector u = u_k.evaluate(t);
    Vector out = au0 + g(t, u);
    if (j_copy) {
      const auto it = std::upper_bound(b.begin(), b.end(), t);
      const int j = std::clamp(static_cast<int>(it - b.begin()) - 1, 0, j_copy->p() - 1);
      out += (*j_copy)[j].apply(Vector(u0 - u));
    }
    return out;
  };
}

Matrix wr_source_samples(const NonlinearIVP& ivp, const Waveform& u_k,
                         const PiecewiseJacobian* jac, int j) {
  const SampleGrid& grid = u_k.segment(j).grid;
  const Matrix states = u_k.states(j);
  const Vector au0 = ivp.a.apply(ivp.u0);
  Matrix out(states.rows(), states.cols());
  for (int i = 0; i < grid.size(); ++i) {
    Vector col = au0 + ivp.g(grid[i], states.col(i));
    if (jac != nullptr) col += (*jac)[j].apply(Vector(ivp.u0 - states.col(i)));
    if (!col.allFinite()) {
      throw SolverError("wr: non-finite source sample at t = " + std::to_string(grid[i]));
    }
    out.col(i) = col;
  }
  return out;
}

WrStep wr_parallel_step(const NonlinearIVP& ivp, const Waveform& u_k, const Partition& partition,
                        const WrConfig& cfg, const EbkConfig& ebk) {
  cfg.validate();
  ebk.validate();
  check_grids(u_k, partition);
  const int p = partition.p();
  const Clock clock = cfg.clock ? cfg.clock : steady_clock();
  const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  const bool averaged = cfg.jacobian == JacobianMode::averaged;

  // Per-subinterval operator A + J_{k,j} and its shifted factorization; every
  // subproblem's homogeneous leg needs the later ones.
  std::vector<SparseOperator> jac_parts(static_cast<std::size_t>(p));
  std::vector<std::unique_ptr<ShiftedFactorization>> facs(static_cast<std::size_t>(p));
  WrStep step;
  step.task_time.assign(static_cast<std::size_t>(p), 0.0);
  step.stats.resize(static_cast<std::size_t>(p));
  fork_join(p, cfg.mode, threads, [&](int j) {
    const double start = clock();
    SparseOperator op = ivp.a;
    if (averaged) {
      jac_parts[j] = average_jacobian(ivp, u_k, j);
      op = ivp.a.combine(1.0, jac_parts[j], 1.0);
    }
    facs[j] = std::make_unique<ShiftedFactorization>(std::move(op),
                                                     ebk.shift_for(partition.grid(j).length()));
    step.task_time[j] = clock() - start;
  });
  std::optional<PiecewiseJacobian> jac;
  if (averaged) jac.emplace(std::move(jac_parts));

  std::vector<Waveform> parts(static_cast<std::size_t>(p));
  fork_join(p, cfg.mode, threads, [&](int j) {
    const double start = clock();
    const SampleGrid& grid = partition.grid(j);
    const Matrix samples = wr_source_samples(ivp, u_k, jac ? &*jac : nullptr, j);
    const LowRankSource src = build_low_rank(samples, grid, cfg.rank);
    EbkResult local = ebk_solve(*facs[j], src, ebk);
    Waveform v = std::move(local.waveform);
    EbkStats stats = local.stats;
    if (j + 1 < p) {
      std::vector<HomogeneousLeg> legs;
      for (int i = j + 1; i < p; ++i) legs.push_back({facs[i].get(), {partition.grid(i)}});
      EbkResult later = propagate_homogeneous(legs, v.final_state(), ebk);
      for (const auto& seg : later.waveform.segments()) v.append_factored(seg.grid, seg.basis, seg.coeffs);
      stats.blocks += later.stats.blocks;
      stats.cycles += later.stats.cycles;
      stats.basis_vectors += later.stats.basis_vectors;
    }
    parts[j] = std::move(v);
    step.stats[j] = std::move(stats);
    step.task_time[j] += clock() - start;
  });

  std::vector<const Waveform*> ptrs;
  for (const auto& w : parts) ptrs.push_back(&w);
  step.u = superpose(ivp.u0, partition, ptrs);
  step.iter_time_max = *std::max_element(step.task_time.begin(), step.task_time.end());
  return step;
}

double waveform_change(const Waveform& a, const Waveform& b) {
  if (a.segment_count() != b.segment_count()) {
    throw InvalidArgument("waveform_change: different segment counts");
  }
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.segment_count(); ++i) {
    if (!(a.segment(i).grid == b.segment(i).grid)) {
      throw InvalidArgument("waveform_change: different sample grids");
    }
    const Matrix sa = a.states(i);
    const Matrix sb = b.states(i);
    diff = std::max(diff, (sa - sb).colwise().norm().maxCoeff());
    ref = std::max(ref, sb.colwise().norm().maxCoeff());
  }
  return ref > 0.0 ? diff / ref : diff;
}

WrResult wr_run(const NonlinearIVP& ivp, const Partition& partition, const WrConfig& cfg,
                const EbkConfig& ebk) {
  cfg.validate();
  WrResult out;
  Waveform u = Waveform::constant(ivp.u0, partition.grids());
  std::optional<Vector> reference;
  if (ivp.exact) reference = ivp.exact(partition.t_end());
  double first_change = 0.0;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    WrStep step = wr_parallel_step(ivp, u, partition, cfg, ebk);
    WrIteration it;
    it.iteration = k;
    it.iterate_change = waveform_change(step.u, u);
    it.iter_time_max = step.iter_time_max;
    it.error = reference ? relative_error(step.u.final_state(), *reference)
                         : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(it.iterate_change)) {
      throw SolverError("wr: non-finite iterate at iteration " + std::to_string(k));
    }
    out.history.push_back(it);
    out.total_time += step.iter_time_max;
    u = std::move(step.u);
    if (k == 1) {
      first_change = it.iterate_change;
    } else if (first_change > 0.0 && it.iterate_change > cfg.divergence_factor * first_change) {
      throw SolverError("wr: diverging at iteration " + std::to_string(k) + ", iterate change " +
                        std::to_string(it.iterate_change) + " vs " + std::to_string(first_change) +
                        " after the first sweep");
    }
    if (cfg.wr_tol > 0.0 && it.iterate_change <= cfg.wr_tol) {
      out.converged = true;
      break;
    }
  }
  out.u = std::move(u);
  return out;
}

}  // namespace pebk
