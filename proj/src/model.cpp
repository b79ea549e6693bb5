#include "pebk/model.hpp"

#include "pebk/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace pebk {

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

GridSpec::GridSpec(Index n) : n_(n) {
  if (n_ < 3) throw InvalidArgument("GridSpec: need at least 3 nodes");
}

GridSpec GridSpec::from_spacing(double dx) {
  if (!(dx > 0.0)) throw InvalidArgument("GridSpec: dx must be positive");
  const double inv = 1.0 / dx;
  const double n = std::round(inv);
  if (std::abs(n - inv) > 1e-9 * inv) {
    throw InvalidArgument("GridSpec: 1/dx = " + std::to_string(inv) + " is not an integer");
  }
  return GridSpec(static_cast<Index>(n));
}

Vector GridSpec::points() const {
  Vector x(n_);
  for (Index j = 0; j < n_; ++j) x[j] = static_cast<double>(j) / static_cast<double>(n_);
  return x;
}

SparseOperator first_difference(const GridSpec& grid) {
  const auto n = static_cast<std::size_t>(grid.n());
  const double c = 1.0 / (2.0 * grid.dx());
  std::vector<double> lo(n, -c), di(n, 0.0), up(n, c);
  return SparseOperator::periodic_tridiagonal(lo, di, up);
}

SparseOperator second_difference(const GridSpec& grid) {
  const auto n = static_cast<std::size_t>(grid.n());
  const double c = 1.0 / (grid.dx() * grid.dx());
  std::vector<double> lo(n, c), di(n, -2.0 * c), up(n, c);
  return SparseOperator::periodic_tridiagonal(lo, di, up);
}

SparseOperator build_ade(const GridSpec& grid, const AdeParams& p) {
  if (p.nu < 0.0) throw InvalidArgument("build_ade: diffusivity must be >= 0");
  return second_difference(grid).combine(p.nu, first_difference(grid), -p.a);
}

ManufacturedSolution travelling_pulses() {
  return [](const Vector& x, double t) {
    constexpr double k = 10.0 * pi;
    const Index n = x.size();
    FieldSample f{Vector(n), Vector(n), Vector(n), Vector(n)};
    for (Index j = 0; j < n; ++j) {
      const double ph = k * (x[j] - t);
      const double s = std::sin(ph);
      const double c = std::cos(ph);
      f.u[j] = 0.5 - 0.5 * c;
      f.u_t[j] = -0.5 * k * s;
      f.u_x[j] = 0.5 * k * s;
      f.u_xx[j] = 0.5 * k * k * c;
    }
    return f;
  };
}

double smoothing_factor(int k, double eps) {
  const double z = 0.5 * pi * k * eps;
  if (std::abs(z) < 1e-8) return 1.0;
  return z / std::sinh(z);
}

double sawtooth_solution(double xi, double eps, int k_max) {
  if (!(eps > 0.0) || k_max < 1) throw InvalidArgument("sawtooth_solution: need eps > 0, k_max >= 1");
  double u = 0.5;
  for (int k = 1; k <= k_max; ++k) {
    u -= std::sin(2.0 * pi * k * xi) * smoothing_factor(k, eps) / (pi * k);
  }
  return u;
}

ManufacturedSolution sawtooth_wave(double eps, int k_max) {
  if (!(eps > 0.0) || k_max < 1) throw InvalidArgument("sawtooth_wave: need eps > 0, k_max >= 1");
  std::vector<double> phi(static_cast<std::size_t>(k_max + 1));
  for (int k = 1; k <= k_max; ++k) phi[k] = smoothing_factor(k, eps);
  return [phi, k_max](const Vector& x, double t) {
    const Index n = x.size();
    FieldSample f{Vector(n), Vector(n), Vector(n), Vector(n)};
    for (Index j = 0; j < n; ++j) {
      const double xi = x[j] - 0.5 * t + 0.5;
      const std::complex<double> step = std::polar(1.0, 2.0 * pi * xi);
      std::complex<double> e = 1.0;
      double u = 0.5, du = 0.0, d2u = 0.0;
      for (int k = 1; k <= k_max; ++k) {
        e *= step;  // exp(2 pi i k xi)
        if (k % 16 == 0) e = std::polar(1.0, 2.0 * pi * k * xi);
        u -= e.imag() * phi[k] / (pi * k);
        du -= 2.0 * phi[k] * e.real();
        d2u += 4.0 * pi * k * phi[k] * e.imag();
      }
      f.u[j] = u;
      f.u_x[j] = du;
      f.u_xx[j] = d2u;
      f.u_t[j] = -0.5 * du;
    }
    return f;
  };
}

double multiscale_solution(double x, double t, int k0) {
  if (k0 <= 1) throw InvalidArgument("multiscale_solution: k0 must exceed 1");
  return std::sin(2 * pi * x) * std::sin(2 * pi * t) +
         std::sin(2 * k0 * pi * x) * std::sin(2 * k0 * pi * t) / k0;
}

ManufacturedSolution multiscale_wave(int k0) {
  if (k0 <= 1) throw InvalidArgument("multiscale_wave: k0 must exceed 1");
  return [k0](const Vector& x, double t) {
    const Index n = x.size();
    FieldSample f{Vector(n), Vector(n), Vector(n), Vector(n)};
    const double w = 2.0 * pi;
    const double wk = 2.0 * pi * k0;
    const double st = std::sin(w * t), ct = std::cos(w * t);
    const double skt = std::sin(wk * t), ckt = std::cos(wk * t);
    for (Index j = 0; j < n; ++j) {
      const double sx = std::sin(w * x[j]), cx = std::cos(w * x[j]);
      const double skx = std::sin(wk * x[j]), ckx = std::cos(wk * x[j]);
      f.u[j] = sx * st + skx * skt / k0;
      f.u_t[j] = w * sx * ct + w * skx * ckt;
      f.u_x[j] = w * cx * st + w * ckx * skt;
      f.u_xx[j] = -w * w * sx * st - w * wk * skx * skt;
    }
    return f;
  };
}

SourceFn manufactured_forcing(const ManufacturedSolution& solution, Equation equation,
                              const AdeParams& params, const GridSpec& grid, ForcingMode mode) {
  const Vector x = grid.points();
  if (mode == ForcingMode::none) {
    return [n = grid.n()](double) { return Vector(Vector::Zero(n)); };
  }
  if (mode == ForcingMode::continuum) {
    return [solution, equation, params, x](double t) {
      const FieldSample s = solution(x, t);
      Vector f = s.u_t - params.nu * s.u_xx;
      if (equation == Equation::ade) {
        f += params.a * s.u_x;
      } else {
        f += s.u.cwiseProduct(s.u_x);
      }
      return f;
    };
  }
  const SparseOperator d1 = first_difference(grid);
  const SparseOperator d2 = second_difference(grid);
  return [solution, equation, params, x, d1, d2](double t) {
    const FieldSample s = solution(x, t);
    const Vector du = d1.apply(s.u);
    Vector f = s.u_t - params.nu * d2.apply(s.u);
    if (equation == Equation::ade) {
      f += params.a * du;
    } else {
      f += s.u.cwiseProduct(du);
    }
    return f;
  };
}

AdeExact::AdeExact() {
  // Composite 64-panel, 10-point Gauss-Legendre rule on [-1, 1]. The
  // integrands are trigonometric polynomials of degree <= 40.
  static constexpr std::array<double, 5> node{0.1488743389816312, 0.4333953941292472,
                                              0.6794095682990244, 0.8650633666889845,
                                              0.9739065285171717};
  static constexpr std::array<double, 5> weight{0.2955242247147529, 0.2692667193099963,
                                                0.2190863625159820, 0.1494513491505806,
                                                0.0666713443086881};
  constexpr int panels = 64;
  const double h = 2.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -1.0 + (p + 0.5) * h;
    for (int q = 0; q < 5; ++q) {
      for (int sign : {-1, 1}) {
        const double xq = mid + sign * 0.5 * h * node[q];
        const double wq = 0.5 * h * weight[q];
        const double f = std::pow(std::sin(pi * xq), 20);
        for (int n = 0; n <= 20; ++n) coef_[n] += wq * f * std::cos(n * pi * xq);
      }
    }
  }
  coef_[0] *= 0.5;
}

Vector AdeExact::operator()(const Vector& x, double t, const AdeParams& p) const {
  Vector u = Vector::Zero(x.size());
  for (int n = 0; n <= 20; ++n) {
    if (coef_[n] == 0.0) continue;
    const double decay = std::exp(-(n * pi) * (n * pi) * p.nu * t);
    const double amp = coef_[n] * decay;
    if (amp == 0.0) continue;
    for (Index j = 0; j < x.size(); ++j) u[j] += amp * std::cos(n * pi * (x[j] - p.a * t));
  }
  return u;
}

Vector ade_exact(const Vector& x, double t, const AdeParams& p) {
  static const AdeExact series;
  return series(x, t, p);
}

LinearIVP pulse_ade_ivp(const GridSpec& grid, const AdeParams& p, double horizon) {
  const Vector x = grid.points();
  Vector field(x.size());
  for (Index j = 0; j < x.size(); ++j) field[j] = std::pow(std::sin(pi * x[j]), 20);
  LinearIVP ivp;
  ivp.a = build_ade(grid, p);
  ivp.u0 = Vector::Zero(grid.n());
  const Vector source = ivp.a.apply(field);
  ivp.g = [source](double) { return source; };
  ivp.horizon = horizon;
  ivp.offset = field;
  ivp.exact = [x, p](double t) { return ade_exact(x, t, p); };
  return ivp;
}

LinearIVP traveling_pulse_ivp(const GridSpec& grid, const AdeParams& p, double horizon,
                              ForcingMode mode) {
  const Vector x = grid.points();
  const ManufacturedSolution sol = travelling_pulses();
  LinearIVP ivp;
  ivp.a = build_ade(grid, p);
  ivp.u0 = sol(x, 0.0).u;
  ivp.g = manufactured_forcing(sol, Equation::ade, p, grid, mode);
  ivp.horizon = horizon;
  ivp.offset = Vector::Zero(grid.n());
  ivp.exact = [sol, x](double t) { return sol(x, t).u; };
  ivp.forcing = mode;
  return ivp;
}

BurgersPieces build_burgers(const GridSpec& grid, double nu, SourceFn forcing) {
  if (nu < 0.0) throw InvalidArgument("build_burgers: viscosity must be >= 0");
  const SparseOperator d1 = first_difference(grid);
  BurgersPieces pieces;
  pieces.a = second_difference(grid).scaled(nu);
  pieces.g = [d1, forcing = std::move(forcing)](double t, const Vector& u) {
    Vector out = forcing(t);
    out -= u.cwiseProduct(d1.apply(u));
    return out;
  };
  const double c = 1.0 / (2.0 * grid.dx());
  pieces.jac_g = [d1, c](const Vector& u) {
    // -diag(D1 u) - diag(u) D1
    const Vector du = d1.apply(u);
    const auto n = static_cast<std::size_t>(u.size());
    std::vector<double> lo(n), di(n), up(n);
    for (std::size_t j = 0; j < n; ++j) {
      lo[j] = c * u[static_cast<Index>(j)];
      di[j] = -du[static_cast<Index>(j)];
      up[j] = -c * u[static_cast<Index>(j)];
    }
    return SparseOperator::periodic_tridiagonal(lo, di, up);
  };
  return pieces;
}

NonlinearIVP burgers_ivp(const GridSpec& grid, double nu, const ManufacturedSolution& solution,
                         ForcingMode mode, double horizon) {
  const Vector x = grid.points();
  BurgersPieces pieces = build_burgers(
      grid, nu, manufactured_forcing(solution, Equation::burgers, {0.0, nu}, grid, mode));
  NonlinearIVP ivp;
  ivp.a = std::move(pieces.a);
  ivp.g = std::move(pieces.g);
  ivp.jac_g = std::move(pieces.jac_g);
  ivp.u0 = solution(x, 0.0).u;
  ivp.horizon = horizon;
  ivp.exact = [solution, x](double t) { return solution(x, t).u; };
  ivp.forcing = mode;
  return ivp;
}

}  // namespace pebk
