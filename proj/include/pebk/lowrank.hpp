#pragma once

#include "pebk/linalg.hpp"
#include "pebk/spline.hpp"

#include <functional>
#include <iosfwd>
#include <variant>
#include <vector>

namespace pebk {

using SourceFn = std::function<Vector(double)>;

enum class NodeKind { chebyshev, uniform };

/// Sample times on one subinterval, endpoints included.
class SampleGrid {
public:
  SampleGrid() = default;
  SampleGrid(double t_start, double t_end, int count, NodeKind kind);
  /// Arbitrary strictly increasing nodes; the endpoints are the first and last.
  static SampleGrid from_nodes(std::vector<double> nodes);

  double t_start() const noexcept { return nodes_.front(); }
  double t_end() const noexcept { return nodes_.back(); }
  double length() const noexcept { return t_end() - t_start(); }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  NodeKind kind() const noexcept { return kind_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  double operator[](int i) const { return nodes_[static_cast<std::size_t>(i)]; }

  /// Midpoints between consecutive nodes.
  std::vector<double> midpoints() const;

  bool operator==(const SampleGrid& other) const { return nodes_ == other.nodes_; }

private:
  std::vector<double> nodes_;
  NodeKind kind_ = NodeKind::uniform;
};

/// Keep a fixed number of singular triplets.
struct FixedRank {
  int m;
};
/// Keep the smallest m with sigma_{m+1} / sigma_1 <= tau.
struct RelativeTolerance {
  double tau;
};
using RankRule = std::variant<FixedRank, RelativeTolerance>;

/// Truncated-SVD factorisation g(t) ~ U p(t) on one subinterval.
class LowRankSource {
public:
  LowRankSource() = default;
  LowRankSource(SampleGrid grid, Matrix basis, CubicSpline coefficients,
                Vector singular_values);

  /// Identically zero source of dimension n on the grid.
  static LowRankSource zero(Index n, SampleGrid grid);

  Index n() const noexcept { return n_; }
  int rank() const noexcept { return static_cast<int>(basis_.cols()); }
  const SampleGrid& grid() const noexcept { return grid_; }
  double t_start() const noexcept { return grid_.t_start(); }
  double t_end() const noexcept { return grid_.t_end(); }
  const Matrix& basis() const noexcept { return basis_; }
  const Vector& singular_values() const noexcept { return singular_values_; }
  const CubicSpline& coefficients() const noexcept { return coefficients_; }

  /// p(t); throws outside the subinterval.
  Vector coefficients_at(double t) const;
  /// U p(t); throws outside the subinterval.
  Vector evaluate(double t) const;
  /// Columns U p(t_i) at the grid nodes.
  Matrix node_values() const;

private:
  Index n_ = 0;
  SampleGrid grid_;
  Matrix basis_;
  CubicSpline coefficients_;
  Vector singular_values_;
};

/// Columns g(t_i); throws naming the node if a sample is not finite.
Matrix sample_source(const SourceFn& g, const SampleGrid& grid);

LowRankSource build_low_rank(const Matrix& samples, const SampleGrid& grid,
                             const RankRule& rule);

Vector evaluate(const LowRankSource& src, double t);

/// max_t ||g(t) - U p(t)|| / max_t ||g(t)|| over the validation times.
double approximation_error(const LowRankSource& src, const SourceFn& g,
                           const std::vector<double>& validation_times);

struct DecayRow {
  double interval_length;
  int j;  // 1-based index of sigma_j
  double sigma;
};

/// Singular spectra of the source samples on [t0, t0 + dT/2^h] for
/// h = 0..halvings, with the node count and kind of `base` kept fixed.
std::vector<DecayRow> decay_report(const SourceFn& g, const SampleGrid& base, int halvings);

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows);

}  // namespace pebk
