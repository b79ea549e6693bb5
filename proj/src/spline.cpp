#include "pebk/spline.hpp"

#include "pebk/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pebk {

CubicSpline::CubicSpline(std::vector<double> nodes, Matrix values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  const auto s = static_cast<Index>(nodes_.size());
  if (s < 2) throw InvalidArgument("CubicSpline: need at least two nodes");
  if (values_.cols() != s) throw InvalidArgument("CubicSpline: one value column per node");
  for (Index i = 0; i + 1 < s; ++i) {
    if (!(nodes_[i + 1] > nodes_[i])) {
      throw InvalidArgument("CubicSpline: nodes must be strictly increasing");
    }
  }
  const Index r = values_.rows();
  second_ = Matrix::Zero(r, s);
  if (s == 2) return;

  std::vector<double> h(static_cast<std::size_t>(s - 1));
  for (Index i = 0; i + 1 < s; ++i) h[i] = nodes_[i + 1] - nodes_[i];
  Matrix slope(r, s - 1);
  for (Index i = 0; i + 1 < s; ++i) slope.col(i) = (values_.col(i + 1) - values_.col(i)) / h[i];

  if (s == 3) {
    const Vector m = 2.0 * (slope.col(1) - slope.col(0)) / (h[0] + h[1]);
    for (Index i = 0; i < 3; ++i) second_.col(i) = m;
    return;
  }

  // Rows 0 and s-1 carry the not-a-knot conditions (third derivative
  // continuous across nodes 1 and s-2); interior rows are the usual
  // second-derivative continuity equations.
  Matrix sys = Matrix::Zero(s, s);
  Matrix rhs = Matrix::Zero(s, r);
  sys(0, 0) = h[1];
  sys(0, 1) = -(h[0] + h[1]);
  sys(0, 2) = h[0];
  for (Index i = 1; i + 1 < s; ++i) {
    sys(i, i - 1) = h[i - 1];
    sys(i, i) = 2.0 * (h[i - 1] + h[i]);
    sys(i, i + 1) = h[i];
    rhs.row(i) = 6.0 * (slope.col(i) - slope.col(i - 1)).transpose();
  }
  sys(s - 1, s - 3) = h[s - 2];
  sys(s - 1, s - 2) = -(h[s - 3] + h[s - 2]);
  sys(s - 1, s - 1) = h[s - 3];
  second_ = sys.partialPivLu().solve(rhs).transpose();
}

Index CubicSpline::locate(double t) const {
  const double lo = nodes_.front();
  const double hi = nodes_.back();
  const double slack = 1e-12 * std::max(1.0, hi - lo);
  if (t < lo - slack || t > hi + slack) {
    throw InvalidArgument("CubicSpline: t = " + std::to_string(t) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  Index i = static_cast<Index>(it - nodes_.begin()) - 1;
  return std::clamp<Index>(i, 0, pieces() - 1);
}

Matrix CubicSpline::piece_coefficients(Index i) const {
  const double h = nodes_[i + 1] - nodes_[i];
  Matrix c(values_.rows(), 4);
  const auto y0 = values_.col(i);
  const auto y1 = values_.col(i + 1);
  const auto m0 = second_.col(i);
  const auto m1 = second_.col(i + 1);
  c.col(0) = y0;
  c.col(1) = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
  c.col(2) = 0.5 * m0;
  c.col(3) = (m1 - m0) / (6.0 * h);
  return c;
}

Vector CubicSpline::operator()(double t) const {
  const Index i = locate(t);
  const double tau = t - nodes_[i];
  const Matrix c = piece_coefficients(i);
  return c.col(0) + tau * (c.col(1) + tau * (c.col(2) + tau * c.col(3)));
}

}  // namespace pebk
