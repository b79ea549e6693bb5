#pragma once

// Semi-discrete model problems: periodic 1-D advection-diffusion and viscous
// Burgers on [0, 1), manufactured solutions and their forcing terms.

#include "pebk/linalg.hpp"
#include "pebk/lowrank.hpp"

#include <array>
#include <functional>

namespace pebk {

/// Periodic grid x_j = j*dx, j = 0..n-1 (the endpoint x = 1 is x_0).
class GridSpec {
public:
  explicit GridSpec(Index n);
  /// Requires 1/dx to be an integer (to within 1e-9 relative).
  static GridSpec from_spacing(double dx);

  Index n() const noexcept { return n_; }
  double dx() const noexcept { return 1.0 / static_cast<double>(n_); }
  Vector points() const;

private:
  Index n_;
};

struct AdeParams {
  double a = 1.0;    // advection velocity
  double nu = 1e-2;  // diffusivity
};

enum class ForcingMode { none, continuum, discrete };

/// u' = A u + g(t), u(0) = u0 on [0, horizon].
///
/// `offset` is added back to the state to recover the physical field (pulse
/// problems are posed for v = u - u0). `exact`, when set, returns the
/// physical field at time t.
struct LinearIVP {
  SparseOperator a;
  Vector u0;
  SourceFn g;
  double horizon = 1.0;
  Vector offset;
  SourceFn exact;
  ForcingMode forcing = ForcingMode::none;
};

using NonlinearSourceFn = std::function<Vector(double, const Vector&)>;
using JacobianFn = std::function<SparseOperator(const Vector&)>;

/// u' = A u + g(t, u), u(0) = u0 on [0, horizon].
struct NonlinearIVP {
  SparseOperator a;
  NonlinearSourceFn g;
  JacobianFn jac_g;
  Vector u0;
  double horizon = 1.0;
  SourceFn exact;
  ForcingMode forcing = ForcingMode::none;
};

/// Periodic central differences: D1 ~ d/dx, D2 ~ d2/dx2.
SparseOperator first_difference(const GridSpec& grid);
SparseOperator second_difference(const GridSpec& grid);

/// A = nu*D2 - a*D1.
SparseOperator build_ade(const GridSpec& grid, const AdeParams& p);

/// Closed-form manufactured field with its derivatives, evaluated on a set
/// of points at one time.
struct FieldSample {
  Vector u, u_t, u_x, u_xx;
};
using ManufacturedSolution = std::function<FieldSample(const Vector& x, double t)>;

/// u = 1/2 - 1/2 cos(10 pi (x - t)): five pulses travelling at unit speed.
ManufacturedSolution travelling_pulses();

/// Smoothed sawtooth u(xi) = 1/2 - sum_k sin(2 pi k xi) Phi(k, eps) / (pi k),
/// travelling as xi = x - t/2 + 1/2.
ManufacturedSolution sawtooth_wave(double eps = 0.1, int k_max = 100);

/// sin(2 pi x) sin(2 pi t) + sin(2 k0 pi x) sin(2 k0 pi t) / k0.
ManufacturedSolution multiscale_wave(int k0);

double smoothing_factor(int k, double eps);
double sawtooth_solution(double xi, double eps = 0.1, int k_max = 100);
double multiscale_solution(double x, double t, int k0);

enum class Equation { ade, burgers };

/// Forcing that makes `solution` satisfy the PDE (continuum mode) or the
/// semi-discrete system built on `grid` (discrete mode).
SourceFn manufactured_forcing(const ManufacturedSolution& solution, Equation equation,
                              const AdeParams& params, const GridSpec& grid, ForcingMode mode);

/// Exact periodic solution of the pulse problem u(x, 0) = sin^20(pi x) as a
/// 21-term cosine series with quadrature-computed coefficients.
class AdeExact {
public:
  AdeExact();
  const std::array<double, 21>& coefficients() const noexcept { return coef_; }
  Vector operator()(const Vector& x, double t, const AdeParams& p) const;

private:
  std::array<double, 21> coef_{};
};

Vector ade_exact(const Vector& x, double t, const AdeParams& p);

/// Pulse problem in shifted form: v' = A v + A u0, v(0) = 0, offset u0.
LinearIVP pulse_ade_ivp(const GridSpec& grid, const AdeParams& p, double horizon = 1.0);

/// Forced problem whose solution is travelling_pulses().
LinearIVP traveling_pulse_ivp(const GridSpec& grid, const AdeParams& p, double horizon = 1.0,
                              ForcingMode mode = ForcingMode::continuum);

/// Linear part nu*D2 and nonlinear part g(t, u) = -u .* (D1 u) + f(t).
struct BurgersPieces {
  SparseOperator a;
  NonlinearSourceFn g;
  JacobianFn jac_g;
};
BurgersPieces build_burgers(const GridSpec& grid, double nu, SourceFn forcing);

NonlinearIVP burgers_ivp(const GridSpec& grid, double nu, const ManufacturedSolution& solution,
                         ForcingMode mode, double horizon);

}  // namespace pebk
