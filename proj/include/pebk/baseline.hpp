#pragma once

// Reference solvers: Crank-Nicolson, Paraexp with Crank-Nicolson legs, and a
// brute-force classical RK4 / dense exponential oracle.

#include "pebk/ebk.hpp"
#include "pebk/model.hpp"
#include "pebk/paraexp.hpp"

#include <vector>

namespace pebk {

/// Number of uniform steps of size at most dt covering `length`. Ratios
/// within 1e-9 of an integer are snapped to it before rounding up.
long cn_step_count(double length, double dt);

struct CnResult {
  Waveform u;
  long steps = 0;
};

/// (I - h/2 A) u_{k+1} = (I + h/2 A) u_k + h/2 (g(t_k) + g(t_{k+1})) from
/// u_start at grids.front().t_start() to grids.back().t_end() with
/// h = length / cn_step_count(length, dt). States at the grid nodes come
/// from cubic Hermite interpolation of the step states and their
/// derivatives A u + g.
CnResult cn_solve(const SparseOperator& a, const SourceFn& g, const Vector& u_start,
                  const std::vector<SampleGrid>& grids, double dt);

struct ParaexpCnResult {
  Waveform u;
  std::vector<double> tau1;  // CN legs
  std::vector<double> tau2;  // exponential legs
  std::vector<long> steps;   // CN steps per subproblem
  double dt_parallel = 0.0;

  double max_tau1() const;
  double max_tau2() const;
};

/// Paraexp with CN on each subinterval at dt / P^{1/4} and a single-vector
/// shift-and-invert Arnoldi for the homogeneous legs.
ParaexpCnResult paraexp_cn_solve(const LinearIVP& ivp, const Partition& partition, double dt,
                                 const EbkConfig& cfg, const ParaexpOptions& options = {});

/// Classical RK4 with n_steps uniform steps over [0, ivp.horizon].
Vector brute_force_solve(const LinearIVP& ivp, long n_steps);
Vector brute_force_solve(const NonlinearIVP& ivp, long n_steps);

/// exp(horizon * A) u0 by a dense exponential; requires g to be absent.
Vector brute_force_expm(const LinearIVP& ivp);

}  // namespace pebk
