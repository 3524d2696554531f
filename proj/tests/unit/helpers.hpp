#pragma once

#include "mixboot/types.hpp"

#include <random>

namespace testing {

using mixboot::Index;
using mixboot::Matrix;
using mixboot::Vector;

inline Matrix mat2(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return m;
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Matrix random_spd(std::mt19937_64& rng, Index p) {
  const Matrix a = random_matrix(rng, p, p);
  return a * a.transpose() + 0.5 * Matrix::Identity(p, p);
}

// Two well separated blobs of `each` points in p dimensions.
inline Matrix two_blobs(std::mt19937_64& rng, Index each, Index p, double gap = 6.0) {
  Matrix m = random_matrix(rng, 2 * each, p);
  m.bottomRows(each).array() += gap;
  return m;
}

}  // namespace testing
