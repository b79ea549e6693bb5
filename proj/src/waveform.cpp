#include "pebk/waveform.hpp"

#include "pebk/error.hpp"
#include "pebk/spline.hpp"

#include <algorithm>
#include <cmath>

namespace pebk {

Waveform Waveform::constant(const Vector& value, const std::vector<SampleGrid>& grids) {
  Waveform w(value.size());
  for (const auto& g : grids) w.append_dense(g, value.replicate(1, g.size()));
  return w;
}

Waveform Waveform::sample(const SourceFn& f, const std::vector<SampleGrid>& grids) {
  if (grids.empty()) throw InvalidArgument("Waveform::sample: no grids");
  Waveform w(f(grids.front().t_start()).size());
  for (const auto& g : grids) w.append_dense(g, sample_source(f, g));
  return w;
}

namespace {

void check_contiguous(const std::vector<Waveform::Segment>& segs, const SampleGrid& next) {
  if (segs.empty()) return;
  const double prev_end = segs.back().grid.t_end();
  if (std::abs(prev_end - next.t_start()) > 1e-12 * std::max(1.0, std::abs(prev_end))) {
    throw InvalidArgument("Waveform: segments must be contiguous");
  }
}

}  // namespace

void Waveform::append_dense(SampleGrid grid, Matrix states) {
  if (states.rows() != n_ || states.cols() != grid.size()) {
    throw InvalidArgument("Waveform::append_dense: states must be n x (grid size)");
  }
  check_contiguous(segments_, grid);
  segments_.push_back({std::move(grid), nullptr, std::move(states)});
}

void Waveform::append_factored(SampleGrid grid, std::shared_ptr<const Matrix> basis,
                               Matrix coeffs) {
  if (!basis || basis->rows() != n_ || basis->cols() != coeffs.rows() ||
      coeffs.cols() != grid.size()) {
    throw InvalidArgument("Waveform::append_factored: inconsistent factor shapes");
  }
  check_contiguous(segments_, grid);
  segments_.push_back({std::move(grid), std::move(basis), std::move(coeffs)});
}

std::vector<SampleGrid> Waveform::grids() const {
  std::vector<SampleGrid> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) out.push_back(s.grid);
  return out;
}

double Waveform::t_start() const {
  if (segments_.empty()) throw InvalidArgument("Waveform: empty");
  return segments_.front().grid.t_start();
}

double Waveform::t_end() const {
  if (segments_.empty()) throw InvalidArgument("Waveform: empty");
  return segments_.back().grid.t_end();
}

Matrix Waveform::states(std::size_t i) const {
  const Segment& s = segments_.at(i);
  if (s.dense()) return s.coeffs;
  return (*s.basis) * s.coeffs;
}

Vector Waveform::state(std::size_t segment, int node) const {
  const Segment& s = segments_.at(segment);
  if (s.dense()) return s.coeffs.col(node);
  return (*s.basis) * s.coeffs.col(node);
}

Vector Waveform::initial_state() const { return state(0, 0); }

Vector Waveform::final_state() const {
  if (segments_.empty()) throw InvalidArgument("Waveform: empty");
  return state(segments_.size() - 1, segments_.back().grid.size() - 1);
}

Vector Waveform::evaluate(double t) const {
  if (segments_.empty()) throw InvalidArgument("Waveform: empty");
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end()));
  if (t < t_start() - slack || t > t_end() + slack) {
    throw InvalidArgument("Waveform::evaluate: t outside the stored range");
  }
  std::size_t i = 0;
  while (i + 1 < segments_.size() && t >= segments_[i].grid.t_end()) ++i;
  const Segment& s = segments_[i];
  const CubicSpline spline(s.grid.nodes(), s.coeffs);
  const Vector c = spline(std::clamp(t, s.grid.t_start(), s.grid.t_end()));
  if (s.dense()) return c;
  return (*s.basis) * c;
}

double Waveform::max_boundary_jump() const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    const Vector a = state(i, segments_[i].grid.size() - 1);
    const Vector b = state(i + 1, 0);
    const double scale = std::max({a.norm(), b.norm(), 1e-300});
    worst = std::max(worst, (a - b).norm() / scale);
  }
  return worst;
}

void Waveform::accumulate(const Waveform& other) {
  if (other.n_ != n_) throw InvalidArgument("Waveform::accumulate: dimension mismatch");
  if (other.empty()) return;
  std::size_t first = 0;
  while (first < segments_.size() && !(segments_[first].grid == other.segments_.front().grid)) {
    ++first;
  }
  if (first + other.segments_.size() > segments_.size()) {
    throw InvalidArgument("Waveform::accumulate: inconsistent sample grids");
  }
  for (std::size_t k = 0; k < other.segments_.size(); ++k) {
    Segment& mine = segments_[first + k];
    const Segment& theirs = other.segments_[k];
    if (!(mine.grid == theirs.grid)) {
      throw InvalidArgument("Waveform::accumulate: inconsistent sample grids");
    }
    if (!mine.dense()) {
      mine.coeffs = (*mine.basis) * mine.coeffs;
      mine.basis.reset();
    }
    if (theirs.dense()) {
      mine.coeffs += theirs.coeffs;
    } else {
      mine.coeffs.noalias() += (*theirs.basis) * theirs.coeffs;
    }
  }
}

}  // namespace pebk
