#pragma once

// Closed forms and brute-force solvers used as independent references.

#include <complex>
#include <vector>

#include "matkernel.hpp"

namespace hypoctl::oracle {

/// Solves A^T X + X A + Q = 0 through (I kron A^T + A^T kron I) vec X = -vec Q.
Matrix lyapunov_kronecker(const MatrixRef& a, const MatrixRef& q);

/// Spectrum of the Langevin generator with G = omega^2 x^2 / 2:
/// lambda = -n_+ mu_+ - n_- mu_-, mu_+- = (gamma +- sqrt(gamma^2 - 4 omega^2)) / 2,
/// for all n_+ + n_- <= max_order.
std::vector<std::complex<double>> kramers_eigenvalues(double gamma, double omega,
                                                      int max_order);

/// Stabilizing root of 2 a p + q - p^2 b^2 / r = 0.
double scalar_care(double a, double b, double q, double r);

/// One Newton step p -> (q + p^2 b^2 / r) / (2 (b^2 p / r - a)).
double scalar_newton_step(double a, double b, double q, double r, double p);

}  // namespace hypoctl::oracle
