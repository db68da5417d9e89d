#pragma once

#include <random>

#include "matkernel.hpp"

namespace testing {

inline hypoctl::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                     Eigen::Index cols) {
  std::normal_distribution<double> normal;
  hypoctl::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Random matrix shifted so its spectral abscissa is -margin.
inline hypoctl::Matrix random_stable(std::mt19937_64& rng, Eigen::Index n, double margin) {
  hypoctl::Matrix a = random_matrix(rng, n, n);
  a -= (hypoctl::spectral_abscissa(hypoctl::eigenvalues(a)) + margin) *
       hypoctl::Matrix::Identity(n, n);
  return a;
}

}  // namespace testing
