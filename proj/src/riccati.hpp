#pragma once

// Shifted algebraic Riccati equation and the feedback gain it yields.

#include <functional>
#include <vector>

#include "matkernel.hpp"

namespace hypoctl {

struct RiccatiIterate {
  int k = 0;
  /// ||Pi_k - Pi_{k-1}||_F.
  double update_norm = 0.0;
  /// Relative ARE residual of Pi_k.
  double residual = 0.0;
  /// Spectral abscissa of A - B K_{k-1}, the closed loop solved at step k.
  double abscissa = 0.0;
};

struct RiccatiOptions {
  int max_iter = 50;
  double step_tol = 1e-5;
  double residual_tol = 1e-8;
};

using IterateCallback =
    std::function<void(const RiccatiIterate&, const Matrix& pi)>;

struct RiccatiSolution {
  Matrix pi;
  /// K = R^{-1} B^T Pi, one row per input.
  Matrix gain;
  double residual = 0.0;
  std::vector<RiccatiIterate> history;
  /// Spectrum of A - B K for the matrix A passed to the solver.
  ComplexVector closed_loop;
  double delta = 0.0;
  double cost_beta = 1.0;
  /// Dimension of the subspace used by the initializer.
  int init_dimension = 0;
  double init_abscissa = 0.0;
};

/// ||A^T P + P A + Q - P B R^{-1} B^T P||_F / max(1, ||P||_F ||A||_F).
double riccati_residual(const MatrixRef& a, const MatrixRef& b,
                        const MatrixRef& q, const MatrixRef& r,
                        const MatrixRef& pi);

struct InitialGuess {
  Matrix pi;
  int dimension = 0;
  double abscissa = 0.0;
};

/// Solves the Riccati equation restricted to the invariant subspace of A^T
/// belonging to Re(lambda) >= 0, with Q = I there and weight R, and embeds
/// the result. Throws if the resulting closed loop is not stable.
InitialGuess stabilizing_init(const MatrixRef& a, const MatrixRef& b,
                              const MatrixRef& r);

/// Newton iteration Pi_{k+1} = lyap(A - B K_k, Q + K_k^T R K_k).
RiccatiSolution kleinman_newton(const MatrixRef& a, const MatrixRef& b,
                                const MatrixRef& q, const MatrixRef& r,
                                const MatrixRef& pi0,
                                const RiccatiOptions& options = {},
                                const IterateCallback& on_iterate = {});

/// K = (1 / beta) B^T Pi.
Matrix feedback_gain(const MatrixRef& pi, const MatrixRef& b, double beta);

/// Full pipeline for (A_hat + delta I, B_hat) with Q = I and R = beta I.
RiccatiSolution solve_shifted_riccati(const MatrixRef& a_hat,
                                      const MatrixRef& b_hat, double delta,
                                      double cost_beta,
                                      const RiccatiOptions& options = {},
                                      const IterateCallback& on_iterate = {});

}  // namespace hypoctl
