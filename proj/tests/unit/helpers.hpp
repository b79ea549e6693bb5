#pragma once

#include "pebk/linalg.hpp"

#include <random>
#include <vector>

namespace pebk::testing {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

inline Vector random_vector(Index n, std::mt19937& rng) { return random_matrix(n, 1, rng).col(0); }

// Sparse, strictly diagonally dominant with a negative diagonal: every
// eigenvalue lies in the open left half plane.
inline SparseOperator random_stable_operator(Index n, std::mt19937& rng, int per_row = 3) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::uniform_int_distribution<Index> col(0, n - 1);
  std::vector<SparseOperator::Triplet> t;
  for (Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (int k = 0; k < per_row; ++k) {
      const Index j = col(rng);
      if (j == i) continue;
      const double v = d(rng);
      off += std::abs(v);
      t.push_back({i, j, v});
    }
    t.push_back({i, i, -(off + 0.5 + std::abs(d(rng)) * 4.0)});
  }
  return SparseOperator::from_triplets(n, std::move(t));
}

}  // namespace pebk::testing
