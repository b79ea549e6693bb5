#pragma once

// Exponential block Krylov solver with shift-and-invert block Arnoldi,
// residual-based stopping and restarting.

#include "pebk/linalg.hpp"
#include "pebk/lowrank.hpp"
#include "pebk/waveform.hpp"

#include <optional>
#include <span>
#include <vector>

namespace pebk {

struct EbkConfig {
  double tol = 1e-4;          // relative residual target
  int restart_length = 20;    // blocks per Krylov cycle
  double gamma_factor = 0.1;  // shift = gamma_factor * subinterval length
  double gamma = 0.0;         // fixed shift when positive
  int max_krylov_dim = 4000;  // basis vectors summed over all cycles

  void validate() const;
  double shift_for(double interval_length) const;
};

struct EbkStats {
  int cycles = 0;
  int blocks = 0;
  Index basis_vectors = 0;
  double residual = 0.0;
  bool invariant = false;
  int fallback_integrations = 0;
  std::vector<double> residual_history;      // after every block
  std::vector<double> cycle_end_residual;
  // Residual measured directly on each restart source; equals the previous
  // cycle's last residual up to rounding.
  std::vector<double> restart_residual;
};

struct EbkResult {
  Waveform waveform;
  EbkStats stats;
};

/// Block Arnoldi on M = (I - gamma*A)^{-1}, one column at a time, with
/// classical Gram-Schmidt and one reorthogonalization pass.
///
/// Columns whose remainder after orthogonalization falls below 1e-12 of the
/// original norm are dropped, so block widths may shrink. A next block of
/// width zero means the basis spans an invariant subspace.
class BlockKrylovState {
public:
  BlockKrylovState(const ShiftedFactorization& fac, const Matrix& start, int max_blocks);

  const ShiftedFactorization& factorization() const noexcept { return *fac_; }
  double gamma() const noexcept { return fac_->gamma(); }
  Index n() const noexcept { return fac_->n(); }

  /// start = V_1 * R0 (up to dropped columns).
  const Matrix& start_coefficients() const noexcept { return r0_; }

  int blocks() const noexcept { return static_cast<int>(offsets_.size()) - 2; }
  int max_blocks() const noexcept { return max_blocks_; }
  /// Columns of V_l.
  Index dim() const noexcept { return offsets_[offsets_.size() - 2]; }
  Index block_width(int b) const { return offsets_.at(b + 1) - offsets_.at(b); }
  Index next_width() const noexcept { return cols_ - dim(); }
  bool invariant() const noexcept { return next_width() == 0; }

  /// Appends one block. Requires !invariant() and blocks() < max_blocks().
  void expand();

  /// V_l (n x dim) and the trailing block V_{l+1}.
  Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true> basis() const { return v_.leftCols(dim()); }
  Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true> next_block() const { return v_.middleCols(dim(), next_width()); }

  /// Square part H_l of the SaI Hessenberg matrix (dim x dim).
  Matrix sai_hessenberg() const { return h_.topLeftCorner(dim(), dim()); }
  /// H-bar_l, (dim + next_width) x dim.
  Matrix extended_hessenberg() const { return h_.topLeftCorner(cols_, dim()); }
  /// Trailing block H_{l+1,l}: next_width x (width of block l).
  Matrix coupling() const;

  /// (I - gamma*A) V_{l+1}; one extra operator application, cached per block.
  const Matrix& residual_block() const;

  /// max |V^T V - I| over all stored columns.
  double orthogonality_error() const;
  /// ||M V_l - V_{l+1} H-bar_l||_F / ||M V_l||_F.
  double arnoldi_error() const;

private:
  void orthogonalize_into(const Matrix& w, Index target_col_begin, bool record);

  const ShiftedFactorization* fac_;
  int max_blocks_;
  Matrix v_;
  Matrix h_;
  Matrix r0_;
  Index cols_ = 0;
  std::vector<Index> offsets_;
  mutable Matrix residual_block_;
  mutable int residual_block_for_ = -1;
};

/// Solution of the projected system z' = A_l z + F q(t), z(t_0) = z0 at the
/// nodes, plus the coefficients rho(t_i) of the residual in the basis
/// (I - gamma*A) V_{l+1}.
struct ProjectedSolution {
  Matrix z;    // dim x nodes
  Matrix rho;  // next_width x nodes
  bool used_fallback = false;
};

/// Exact integration of the projected system with A_l = (I - H_l^{-1})/gamma
/// for a piecewise cubic q (null means no source). Uses the eigenbasis of H_l
/// with scalar phi-functions when it is well conditioned and an augmented
/// matrix exponential per piece otherwise.
ProjectedSolution integrate_projected(const BlockKrylovState& state, const Vector& z0,
                                      const Matrix& f, const CubicSpline* q,
                                      const std::vector<double>& nodes);

/// max_i ||A y(t_i) + source(t_i) - y'(t_i)|| / scale.
double krylov_residual(const BlockKrylovState& state, const ProjectedSolution& sol,
                       double scale);

/// y' = A y + U p(t), y(t_0) = 0 on the source's grid.
EbkResult ebk_solve(const SparseOperator& a, const LowRankSource& src, const EbkConfig& cfg);
EbkResult ebk_solve(const ShiftedFactorization& fac, const LowRankSource& src,
                    const EbkConfig& cfg);

/// One stretch of a homogeneous propagation: the grids share the operator
/// behind `fac`.
struct HomogeneousLeg {
  const ShiftedFactorization* fac;
  std::vector<SampleGrid> grids;
};

/// y(t) = exp((t - t_a) A) v over contiguous grids. Consecutive legs are
/// chained through their end states.
EbkResult propagate_homogeneous(std::span<const HomogeneousLeg> legs, const Vector& v,
                                const EbkConfig& cfg);
EbkResult propagate_homogeneous(const ShiftedFactorization& fac, const Vector& v,
                                const std::vector<SampleGrid>& grids, const EbkConfig& cfg);
EbkResult propagate_homogeneous(const SparseOperator& a, const Vector& v,
                                const std::vector<SampleGrid>& grids, const EbkConfig& cfg);

}  // namespace pebk
