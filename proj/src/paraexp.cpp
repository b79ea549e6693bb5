#include "pebk/paraexp.hpp"

#include "pebk/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace pebk {

Partition::Partition(std::vector<double> boundaries, int samples, NodeKind kind)
    : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) throw InvalidArgument("Partition: need at least one subinterval");
  for (std::size_t i = 0; i + 1 < boundaries_.size(); ++i) {
    if (!(boundaries_[i + 1] > boundaries_[i])) {
      throw InvalidArgument("Partition: boundaries must increase strictly");
    }
  }
  grids_.reserve(boundaries_.size() - 1);
  for (std::size_t i = 0; i + 1 < boundaries_.size(); ++i) {
    grids_.emplace_back(boundaries_[i], boundaries_[i + 1], samples, kind);
  }
}

Partition Partition::uniform(double t_start, double t_end, int p, int samples, NodeKind kind) {
  if (p < 1) throw InvalidArgument("Partition: P must be >= 1");
  std::vector<double> b(static_cast<std::size_t>(p) + 1);
  for (int j = 0; j <= p; ++j) b[j] = t_start + (t_end - t_start) * j / p;
  b.back() = t_end;
  return Partition(std::move(b), samples, kind);
}

std::vector<SampleGrid> Partition::grids_from(int first) const {
  if (first < 0 || first > p()) throw InvalidArgument("Partition::grids_from: index out of range");
  return {grids_.begin() + first, grids_.end()};
}

ShiftedProblem shift_to_homogeneous(const LinearIVP& ivp) {
  if (ivp.u0.size() != ivp.a.n()) throw InvalidArgument("shift_to_homogeneous: u0 has wrong size");
  const Vector au0 = ivp.a.apply(ivp.u0);
  SourceFn g = ivp.g;
  ShiftedProblem out;
  out.offset = ivp.u0;
  if (g) {
    out.source = [au0, g](double t) -> Vector { return au0 + g(t); };
  } else {
    out.source = [au0](double) { return au0; };
  }
  return out;
}

LowRankSource restrict_source(const SourceFn& g, const Partition& partition, int j,
                              const RankRule& rule) {
  if (j < 0 || j >= partition.p()) throw InvalidArgument("restrict_source: j out of range");
  const SampleGrid& grid = partition.grid(j);
  return build_low_rank(sample_source(g, grid), grid, rule);
}

Vector restricted_value(const LowRankSource& src, double t, bool owns_right_end) {
  const bool inside = t >= src.t_start() && (t < src.t_end() || (owns_right_end && t == src.t_end()));
  if (!inside) return Vector::Zero(src.n());
  return src.evaluate(t);
}

SubproblemSolution solve_subproblem(const SparseOperator& a, const SourceFn& g,
                                    const Partition& partition, int j, const RankRule& rule,
                                    const EbkConfig& cfg, const Clock& clock) {
  if (j < 0 || j >= partition.p()) throw InvalidArgument("solve_subproblem: j out of range");
  SubproblemSolution out;
  out.j = j;
  const double start = clock();
  const LowRankSource src = restrict_source(g, partition, j, rule);
  const ShiftedFactorization fac(a, cfg.shift_for(partition.grid(j).length()));
  EbkResult local = ebk_solve(fac, src, cfg);
  const double mid = clock();
  out.tau1 = mid - start;
  out.nonhomogeneous = local.stats;
  out.v = std::move(local.waveform);
  if (j + 1 < partition.p()) {
    EbkResult later = propagate_homogeneous(fac, out.v.final_state(), partition.grids_from(j + 1), cfg);
    out.tau2 = clock() - mid;
    out.homogeneous = later.stats;
    for (const auto& seg : later.waveform.segments()) {
      if (seg.dense()) {
        out.v.append_dense(seg.grid, seg.coeffs);
      } else {
        out.v.append_factored(seg.grid, seg.basis, seg.coeffs);
      }
    }
  }
  return out;
}

Waveform superpose(const Vector& u0, const Partition& partition,
                   const std::vector<const Waveform*>& parts) {
  Waveform u = Waveform::constant(u0, partition.grids());
  for (const Waveform* part : parts) {
    if (part == nullptr) throw InvalidArgument("superpose: missing subsolution");
    if (part->empty()) continue;
    if (std::abs(part->t_end() - partition.t_end()) > 1e-12 * std::max(1.0, partition.t_end())) {
      throw InvalidArgument("superpose: subsolution does not reach the final time");
    }
    u.accumulate(*part);
  }
  return u;
}

double ParaexpResult::max_tau1() const {
  return tau1.empty() ? 0.0 : *std::max_element(tau1.begin(), tau1.end());
}

double ParaexpResult::max_tau2() const {
  return tau2.empty() ? 0.0 : *std::max_element(tau2.begin(), tau2.end());
}

ParaexpResult paraexp_solve(const LinearIVP& ivp, const Partition& partition,
                            const EbkConfig& cfg, const ParaexpOptions& options) {
  cfg.validate();
  const Clock clock = options.clock ? options.clock : steady_clock();
  const ShiftedProblem shifted = shift_to_homogeneous(ivp);
  const int p = partition.p();
  std::vector<SubproblemSolution> subs(static_cast<std::size_t>(p));
  const int threads = options.threads > 0 ? options.threads : default_thread_count();

  const double start = clock();
  fork_join(p, options.mode, threads, [&](int j) {
    subs[j] = solve_subproblem(ivp.a, shifted.source, partition, j, options.rank, cfg, clock);
  });

  ParaexpResult out;
  std::vector<const Waveform*> parts;
  for (const auto& s : subs) {
    out.tau1.push_back(s.tau1);
    out.tau2.push_back(s.tau2);
    out.nonhomogeneous.push_back(s.nonhomogeneous);
    out.homogeneous.push_back(s.homogeneous);
    parts.push_back(&s.v);
  }
  out.u = superpose(shifted.offset, partition, parts);
  out.wall = clock() - start;
  return out;
}

SerialResult serial_solve(const LinearIVP& ivp, const Partition& windows, const EbkConfig& cfg,
                          const RankRule& rule, const Clock& clock) {
  cfg.validate();
  const Index n = ivp.a.n();
  SerialResult out;
  out.u = Waveform(n);
  const double start = clock();
  Vector state = ivp.u0;
  for (int j = 0; j < windows.p(); ++j) {
    const SampleGrid& grid = windows.grid(j);
    const Vector au = ivp.a.apply(state);
    const SourceFn& g = ivp.g;
    const SourceFn shifted = [&au, &g](double t) -> Vector { return g ? Vector(au + g(t)) : au; };
    const LowRankSource src = build_low_rank(sample_source(shifted, grid), grid, rule);
    EbkResult local = ebk_solve(ivp.a, src, cfg);
    out.stats.push_back(local.stats);

    // u = state + V z, kept factored as [V, state] [z; 1].
    const auto& seg = local.waveform.segment(0);
    const Index r = seg.dense() ? n : seg.basis->cols();
    auto basis = std::make_shared<Matrix>(n, r + 1);
    if (seg.dense()) {
      basis->leftCols(n) = Matrix::Identity(n, n);
    } else {
      basis->leftCols(r) = *seg.basis;
    }
    basis->col(r) = state;
    Matrix coeffs(r + 1, grid.size());
    coeffs.topRows(r) = seg.coeffs;
    coeffs.row(r).setOnes();
    state = (*basis) * coeffs.col(grid.size() - 1);
    out.u.append_factored(grid, std::move(basis), std::move(coeffs));
  }
  out.tau0 = clock() - start;
  return out;
}

}  // namespace pebk
