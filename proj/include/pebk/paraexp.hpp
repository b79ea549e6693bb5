#pragma once

// Linear time-parallel driver: shift to a zero initial state, split the
// source over subintervals, solve the decoupled subproblems, superpose.

#include "pebk/ebk.hpp"
#include "pebk/lowrank.hpp"
#include "pebk/model.hpp"
#include "pebk/parallel.hpp"
#include "pebk/waveform.hpp"

#include <vector>

namespace pebk {

/// Boundaries T_0 < T_1 < ... < T_P with one sample grid per subinterval.
/// Subintervals are indexed j = 0..P-1 and span [T_j, T_{j+1}].
class Partition {
public:
  Partition(std::vector<double> boundaries, int samples, NodeKind kind);
  static Partition uniform(double t_start, double t_end, int p, int samples, NodeKind kind);

  int p() const noexcept { return static_cast<int>(grids_.size()); }
  const std::vector<double>& boundaries() const noexcept { return boundaries_; }
  double t_start() const noexcept { return boundaries_.front(); }
  double t_end() const noexcept { return boundaries_.back(); }
  const SampleGrid& grid(int j) const { return grids_.at(static_cast<std::size_t>(j)); }
  const std::vector<SampleGrid>& grids() const noexcept { return grids_; }
  /// Grids of subintervals first..P-1.
  std::vector<SampleGrid> grids_from(int first) const;

private:
  std::vector<double> boundaries_;
  std::vector<SampleGrid> grids_;
};

/// Zero-initial-state form: u = offset + u_hat with
/// u_hat' = A u_hat + source(t), u_hat(t_0) = 0.
struct ShiftedProblem {
  SourceFn source;  // A u0 + g(t)
  Vector offset;    // u0
};

ShiftedProblem shift_to_homogeneous(const LinearIVP& ivp);

/// Low-rank source built from samples of g on subinterval j only.
LowRankSource restrict_source(const SourceFn& g, const Partition& partition, int j,
                              const RankRule& rule);

/// Value of the zero-extended restriction: src(t) on [t_start, t_end), zero
/// elsewhere. The final subinterval also owns its right endpoint.
Vector restricted_value(const LowRankSource& src, double t, bool owns_right_end);

/// v_j on [T_j, T_P] with the per-leg timings.
struct SubproblemSolution {
  int j = 0;
  Waveform v;
  double tau1 = 0.0;  // nonhomogeneous leg
  double tau2 = 0.0;  // homogeneous leg
  EbkStats nonhomogeneous;
  EbkStats homogeneous;
};

/// Nonhomogeneous solve on subinterval j followed by the homogeneous
/// propagation of its end state over the remaining subintervals. Building
/// the low-rank source and factoring I - gamma*A are charged to tau1.
SubproblemSolution solve_subproblem(const SparseOperator& a, const SourceFn& g,
                                    const Partition& partition, int j, const RankRule& rule,
                                    const EbkConfig& cfg, const Clock& clock = steady_clock());

/// u(t) = u0 + sum_j v_j(t) at every node of the partition.
Waveform superpose(const Vector& u0, const Partition& partition,
                   const std::vector<const Waveform*>& parts);

struct ParaexpOptions {
  RankRule rank = FixedRank{2};
  TimingMode mode = TimingMode::emulated;
  int threads = 0;  // 0: default_thread_count()
  Clock clock = steady_clock();
};

struct ParaexpResult {
  Waveform u;  // state of the ODE (add ivp.offset for the physical field)
  std::vector<double> tau1;
  std::vector<double> tau2;
  std::vector<EbkStats> nonhomogeneous;
  std::vector<EbkStats> homogeneous;
  double wall = 0.0;  // fork-join plus superposition

  double max_tau1() const;
  double max_tau2() const;
};

ParaexpResult paraexp_solve(const LinearIVP& ivp, const Partition& partition,
                            const EbkConfig& cfg, const ParaexpOptions& options = {});

struct SerialResult {
  Waveform u;
  double tau0 = 0.0;
  std::vector<EbkStats> stats;  // one per window
};

/// Time stepping by windows: on each subinterval in turn the current state
/// becomes the initial value and a single EBK solve covers the window.
/// With one window this is the plain serial solve.
SerialResult serial_solve(const LinearIVP& ivp, const Partition& windows, const EbkConfig& cfg,
                          const RankRule& rule, const Clock& clock = steady_clock());

}  // namespace pebk
