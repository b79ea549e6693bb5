#pragma once

// Dense and sparse kernels shared by every solver in the library.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pebk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class StructureHint { general, tridiagonal_periodic };

/// Square operator in compressed sparse row form.
///
/// Immutable after construction. The tridiagonal_periodic hint is checked
/// against the sparsity pattern when the operator is built.
class SparseOperator {
public:
  struct Triplet {
    Index row;
    Index col;
    double value;
  };

  SparseOperator() = default;
  SparseOperator(Index n, std::vector<Index> row_offsets,
                 std::vector<Index> col_indices, std::vector<double> values,
                 StructureHint hint = StructureHint::general);

  /// Duplicate entries are summed; explicit zeros are kept so the pattern
  /// stays stable across parameter values.
  static SparseOperator from_triplets(Index n, std::vector<Triplet> entries,
                                      StructureHint hint = StructureHint::general);

  /// Cyclic tridiagonal operator: row j holds lower[j] at column j-1,
  /// diag[j] at j and upper[j] at j+1, indices taken mod n.
  static SparseOperator periodic_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper);

  static SparseOperator zero(Index n, StructureHint hint = StructureHint::general);
  static SparseOperator identity(Index n);

  Index n() const noexcept { return n_; }
  StructureHint structure_hint() const noexcept { return hint_; }
  const std::vector<Index>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<Index>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  /// y = A x
  Vector apply(const Vector& x) const;
  void apply(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y) const;
  /// Y = A X, column by column.
  Matrix apply(const Matrix& x) const;

  /// Entry lookup, zero when outside the pattern.
  double coeff(Index row, Index col) const;

  /// alpha*this + beta*other over the union of both patterns. The result keeps
  /// the tridiagonal_periodic hint when both operands carry it.
  SparseOperator combine(double alpha, const SparseOperator& other, double beta) const;
  SparseOperator scaled(double alpha) const;

  /// Weighted sum of operators sharing one sparsity pattern.
  static SparseOperator weighted_sum(std::span<const SparseOperator> ops,
                                     std::span<const double> weights);

  bool same_pattern(const SparseOperator& other) const;

  Matrix to_dense() const;
  Eigen::SparseMatrix<double> to_eigen() const;

  /// Coefficients of a cyclic tridiagonal operator (lower, diag, upper).
  /// Requires the tridiagonal_periodic hint.
  void tridiagonal_bands(std::vector<double>& lower, std::vector<double>& diag,
                         std::vector<double>& upper) const;

private:
  void validate() const;

  Index n_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
  StructureHint hint_ = StructureHint::general;
};

Vector matvec(const SparseOperator& a, const Vector& x);

/// Reusable factorization of (I - gamma*A).
///
/// Periodic tridiagonal operators take a banded LU with a Sherman-Morrison
/// correction for the two corner entries; anything else goes through a
/// sparse LU with a column fill-reducing ordering.
class ShiftedFactorization {
public:
  ShiftedFactorization(SparseOperator base, double gamma);

  const SparseOperator& base() const noexcept { return base_; }
  double gamma() const noexcept { return gamma_; }
  Index n() const noexcept { return base_.n(); }

  /// x = (I - gamma*A)^{-1} b
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

private:
  struct Banded;
  SparseOperator base_;
  double gamma_;
  std::shared_ptr<const Banded> banded_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> lu_;
};

ShiftedFactorization factor_shifted(const SparseOperator& a, double gamma);

struct ThinQR {
  Matrix q;
  Matrix r;
};

/// Householder thin QR, with R normalised to a nonnegative diagonal.
ThinQR thin_qr(const Matrix& m);

struct ThinSVD {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

/// Thin SVD: thin QR, then one-sided Jacobi on the small triangular factor.
ThinSVD thin_svd(const Matrix& m);

/// Scaling-and-squaring with a degree-13 Padé approximant.
Matrix dense_expm(const Matrix& h);

/// phi_0..phi_{up_to} of H from one exponential of the block-augmented
/// matrix [[H, I, 0..], [0, 0, I, ..], ..., [0, .., 0]].
std::vector<Matrix> phi_functions(const Matrix& h, int up_to);

}  // namespace pebk
