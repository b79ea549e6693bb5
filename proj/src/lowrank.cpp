#include "pebk/lowrank.hpp"

#include "pebk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace pebk {

SampleGrid::SampleGrid(double t_start, double t_end, int count, NodeKind kind) : kind_(kind) {
  if (count < 2) throw InvalidArgument("SampleGrid: need at least two nodes");
  if (!(t_end > t_start)) throw InvalidArgument("SampleGrid: empty interval");
  nodes_.resize(static_cast<std::size_t>(count));
  const double mid = 0.5 * (t_start + t_end);
  const double half = 0.5 * (t_end - t_start);
  for (int i = 0; i < count; ++i) {
    const double frac = static_cast<double>(i) / (count - 1);
    nodes_[i] = kind == NodeKind::chebyshev
                    ? mid - half * std::cos(std::numbers::pi * frac)
                    : t_start + (t_end - t_start) * frac;
  }
  nodes_.front() = t_start;
  nodes_.back() = t_end;
  if (kind == NodeKind::chebyshev && count % 2 == 1) nodes_[count / 2] = mid;
}

SampleGrid SampleGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) throw InvalidArgument("SampleGrid: need at least two nodes");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!(nodes[i + 1] > nodes[i])) throw InvalidArgument("SampleGrid: nodes must increase");
  }
  SampleGrid g;
  g.nodes_ = std::move(nodes);
  return g;
}

std::vector<double> SampleGrid::midpoints() const {
  std::vector<double> mid;
  mid.reserve(nodes_.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) mid.push_back(0.5 * (nodes_[i] + nodes_[i + 1]));
  return mid;
}

LowRankSource::LowRankSource(SampleGrid grid, Matrix basis, CubicSpline coefficients,
                             Vector singular_values)
    : n_(basis.rows()),
      grid_(std::move(grid)),
      basis_(std::move(basis)),
      coefficients_(std::move(coefficients)),
      singular_values_(std::move(singular_values)) {
  if (coefficients_.components() != basis_.cols()) {
    throw InvalidArgument("LowRankSource: one coefficient function per basis column");
  }
}

LowRankSource LowRankSource::zero(Index n, SampleGrid grid) {
  CubicSpline none(grid.nodes(), Matrix::Zero(0, grid.size()));
  return LowRankSource(std::move(grid), Matrix::Zero(n, 0), std::move(none), Vector());
}

Vector LowRankSource::coefficients_at(double t) const { return coefficients_(t); }

Vector LowRankSource::evaluate(double t) const {
  const Vector p = coefficients_(t);
  if (basis_.cols() == 0) return Vector::Zero(n_);
  return basis_ * p;
}

Matrix LowRankSource::node_values() const {
  Matrix out(n_, grid_.size());
  for (int i = 0; i < grid_.size(); ++i) out.col(i) = evaluate(grid_[i]);
  return out;
}

Vector evaluate(const LowRankSource& src, double t) { return src.evaluate(t); }

Matrix sample_source(const SourceFn& g, const SampleGrid& grid) {
  Matrix samples;
  for (int i = 0; i < grid.size(); ++i) {
    Vector col = g(grid[i]);
    if (i == 0) samples.resize(col.size(), grid.size());
    if (col.size() != samples.rows()) {
      throw InvalidArgument("sample_source: inconsistent source dimension");
    }
    if (!col.allFinite()) {
      throw InvalidArgument("sample_source: non-finite sample at t = " + std::to_string(grid[i]));
    }
    samples.col(i) = col;
  }
  return samples;
}

LowRankSource build_low_rank(const Matrix& samples, const SampleGrid& grid,
                             const RankRule& rule) {
  const Index n = samples.rows();
  const Index s = samples.cols();
  if (s != grid.size()) throw InvalidArgument("build_low_rank: one sample per grid node");

  // Left singular vectors and the rows of Sigma*V^T.
  Matrix left;
  Matrix weighted_right;  // k x s
  Vector sigma;
  if (s <= n) {
    ThinSVD svd = thin_svd(samples);
    left = std::move(svd.u);
    sigma = std::move(svd.singular_values);
    weighted_right = sigma.asDiagonal() * svd.v.transpose();
  } else {
    ThinSVD svd = thin_svd(samples.transpose());
    left = std::move(svd.v);
    sigma = std::move(svd.singular_values);
    weighted_right = sigma.asDiagonal() * svd.u.transpose();
  }
  const Index available = sigma.size();

  Index m = 0;
  if (available > 0 && sigma[0] > 0.0) {
    if (const auto* fixed = std::get_if<FixedRank>(&rule)) {
      if (fixed->m < 0 || fixed->m > s) {
        throw InvalidArgument("build_low_rank: rank " + std::to_string(fixed->m) +
                              " not in [0, s]");
      }
      m = std::min<Index>(fixed->m, available);
    } else {
      const double tau = std::get<RelativeTolerance>(rule).tau;
      if (!(tau >= 0.0)) throw InvalidArgument("build_low_rank: tolerance must be >= 0");
      m = available;
      for (Index k = 0; k < available; ++k) {
        const double next = k + 1 < available ? sigma[k + 1] : 0.0;
        if (next / sigma[0] <= tau) {
          m = k + 1;
          break;
        }
      }
    }
  }
  CubicSpline coeffs(grid.nodes(), weighted_right.topRows(m));
  Vector full = Vector::Zero(s);
  full.head(available) = sigma;
  return LowRankSource(grid, left.leftCols(m), std::move(coeffs), std::move(full));
}

double approximation_error(const LowRankSource& src, const SourceFn& g,
                           const std::vector<double>& validation_times) {
  double worst = 0.0;
  double scale = 0.0;
  for (double t : validation_times) {
    const Vector exact = g(t);
    worst = std::max(worst, (exact - src.evaluate(t)).norm());
    scale = std::max(scale, exact.norm());
  }
  if (scale == 0.0) return worst;
  return worst / scale;
}

std::vector<DecayRow> decay_report(const SourceFn& g, const SampleGrid& base, int halvings) {
  if (halvings < 0) throw InvalidArgument("decay_report: halvings must be >= 0");
  std::vector<DecayRow> rows;
  double length = base.length();
  for (int h = 0; h <= halvings; ++h) {
    SampleGrid grid(base.t_start(), base.t_start() + length, base.size(), base.kind());
    const Matrix samples = sample_source(g, grid);
    const ThinSVD svd = samples.cols() <= samples.rows() ? thin_svd(samples)
                                                         : thin_svd(samples.transpose());
    for (Index j = 0; j < svd.singular_values.size(); ++j) {
      rows.push_back({length, static_cast<int>(j + 1), svd.singular_values[j]});
    }
    length *= 0.5;
  }
  return rows;
}

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows) {
  out << "dT,j,sigma\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6e,%d,%.6e\n", r.interval_length, r.j, r.sigma);
    out << buf;
  }
}

}  // namespace pebk
