#pragma once

#include "pebk/linalg.hpp"

#include <span>
#include <vector>

namespace pebk {

/// Vector-valued piecewise cubic interpolant with not-a-knot end conditions.
///
/// Each row of `values` is one scalar component sampled at the nodes. Two
/// nodes give the linear interpolant and three the interpolating parabola.
class CubicSpline {
public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> nodes, Matrix values);

  Index components() const noexcept { return values_.rows(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  Index pieces() const noexcept { return static_cast<Index>(nodes_.size()) - 1; }

  /// Value at t; throws when t lies outside [nodes.front(), nodes.back()].
  Vector operator()(double t) const;

  /// Local power-basis coefficients of piece i in tau = t - nodes[i]:
  /// column k multiplies tau^k, k = 0..3.
  Matrix piece_coefficients(Index i) const;

  /// Index of the piece containing t (last piece for the right endpoint).
  Index locate(double t) const;

private:
  std::vector<double> nodes_;
  Matrix values_;
  Matrix second_;  // second derivatives at the nodes
};

}  // namespace pebk
