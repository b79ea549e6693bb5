#pragma once

// Waveform relaxation for u' = A u + g(t, u): each sweep lags the nonlinear
// term on the previous iterate, moves a time-averaged Jacobian into the
// operator, and solves the resulting linear problem with the time-parallel
// driver.

#include "pebk/ebk.hpp"
#include "pebk/model.hpp"
#include "pebk/paraexp.hpp"
#include "pebk/parallel.hpp"
#include "pebk/waveform.hpp"

#include <optional>
#include <vector>

namespace pebk {

enum class JacobianMode {
  none,      // Picard: the whole nonlinearity is lagged
  averaged,  // piecewise-constant average Jacobian per subinterval
};

struct WrConfig {
  int max_iterations = 10;  // K
  double wr_tol = 0.0;      // stop once the iterate change falls below; 0 runs all K
  JacobianMode jacobian = JacobianMode::averaged;
  RankRule rank = FixedRank{12};
  TimingMode mode = TimingMode::emulated;
  int threads = 0;  // 0: default_thread_count()
  Clock clock = steady_clock();
  double divergence_factor = 1e3;

  void validate() const;
};

/// One constant operator per subinterval.
class PiecewiseJacobian {
public:
  explicit PiecewiseJacobian(std::vector<SparseOperator> parts) : parts_(std::move(parts)) {}
  int p() const noexcept { return static_cast<int>(parts_.size()); }
  const SparseOperator& operator[](int j) const { return parts_.at(static_cast<std::size_t>(j)); }

private:
  std::vector<SparseOperator> parts_;
};

/// Trapezoidal average of jac_g(u_k(t)) over the sample nodes of each
/// subinterval.
PiecewiseJacobian average_jacobian(const NonlinearIVP& ivp, const Waveform& u_k,
                                   const Partition& partition);
SparseOperator average_jacobian(const NonlinearIVP& ivp, const Waveform& u_k, int segment);

/// g_hat_k(t) = A u0 + g(t, u_k(t)) + J_k(t) (u0 - u_k(t)), with J_k taken on
/// the subinterval containing t (the later one at a shared boundary).
/// A null Jacobian gives the Picard source. Evaluates u_k by interpolation.
SourceFn wr_source(const NonlinearIVP& ivp, const Waveform& u_k, const PiecewiseJacobian* jac,
                   const Partition& partition);

/// The same source sampled at the nodes of subinterval j from the stored
/// states, using J_{k,j} for every node including the right endpoint.
Matrix wr_source_samples(const NonlinearIVP& ivp, const Waveform& u_k,
                         const PiecewiseJacobian* jac, int j);

struct WrStep {
  Waveform u;
  std::vector<double> task_time;  // per subproblem: Jacobian, factorization, solves
  double iter_time_max = 0.0;
  std::vector<EbkStats> stats;
};

WrStep wr_parallel_step(const NonlinearIVP& ivp, const Waveform& u_k, const Partition& partition,
                        const WrConfig& cfg, const EbkConfig& ebk);

struct WrIteration {
  int iteration = 0;
  double error = 0.0;  // relative l2 error at the final time (NaN without a reference)
  double iterate_change = 0.0;
  double iter_time_max = 0.0;
};

struct WrResult {
  Waveform u;
  std::vector<WrIteration> history;
  double total_time = 0.0;  // sum of per-iteration maxima
  bool converged = false;   // wr_tol reached
};

/// Iterates from the constant guess u(t) = u0. Throws SolverError when the
/// iterate change grows by more than divergence_factor over the first one.
WrResult wr_run(const NonlinearIVP& ivp, const Partition& partition, const WrConfig& cfg,
                const EbkConfig& ebk);

/// max over nodes of ||a - b|| divided by max over nodes of ||b||.
double waveform_change(const Waveform& a, const Waveform& b);

}  // namespace pebk
