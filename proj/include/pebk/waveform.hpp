#pragma once

#include "pebk/linalg.hpp"
#include "pebk/lowrank.hpp"

#include <memory>
#include <vector>

namespace pebk {

/// Time-dependent state on a chain of contiguous subintervals.
///
/// Each segment stores the states at its sample nodes, either densely
/// (n x s) or factored as basis * coeffs with a shared n x r basis. Krylov
/// solutions come out factored; superposition produces dense segments.
/// Between nodes the state is the not-a-knot cubic through the segment's
/// nodes.
class Waveform {
public:
  struct Segment {
    SampleGrid grid;
    std::shared_ptr<const Matrix> basis;  // null for dense segments
    Matrix coeffs;                        // r x s, or n x s when dense

    bool dense() const noexcept { return basis == nullptr; }
  };

  explicit Waveform(Index n = 0) : n_(n) {}

  /// Waveform that equals `value` at every node of every grid.
  static Waveform constant(const Vector& value, const std::vector<SampleGrid>& grids);
  /// Dense waveform holding f(t) at every node.
  static Waveform sample(const SourceFn& f, const std::vector<SampleGrid>& grids);

  void append_dense(SampleGrid grid, Matrix states);
  void append_factored(SampleGrid grid, std::shared_ptr<const Matrix> basis, Matrix coeffs);

  Index n() const noexcept { return n_; }
  bool empty() const noexcept { return segments_.empty(); }
  std::size_t segment_count() const noexcept { return segments_.size(); }
  const Segment& segment(std::size_t i) const { return segments_.at(i); }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::vector<SampleGrid> grids() const;

  double t_start() const;
  double t_end() const;

  /// Dense n x s states of segment i.
  Matrix states(std::size_t i) const;
  Vector state(std::size_t segment, int node) const;
  Vector initial_state() const;
  Vector final_state() const;

  /// Cubic interpolation inside the segment containing t. At a shared
  /// boundary the later segment is used.
  Vector evaluate(double t) const;

  /// Largest relative jump between the last node of one segment and the
  /// first node of the next.
  double max_boundary_jump() const;

  /// Add `other` into this waveform at the segments whose grids match.
  /// `other` may cover a suffix of this waveform's segments; it must not
  /// start inside a segment.
  void accumulate(const Waveform& other);

private:
  Index n_;
  std::vector<Segment> segments_;
};

}  // namespace pebk
