#pragma once

// Removal of the invariant-measure direction from the symmetrized system.

#include <vector>

#include "discretize.hpp"
#include "matkernel.hpp"

namespace hypoctl {

struct InvariantDirection {
  /// Unit right null vector of A~, signed so that its entries sum positive.
  Vector vector;
  std::complex<double> eigenvalue;
  /// Smallest modulus among the remaining eigenvalues.
  double next_modulus = 0.0;
  /// |<s, s_analytic>|.
  double alignment = 0.0;
  /// ||A~ s|| / ||A~||_F and ||A~^T s|| / ||A~||_F.
  double right_residual = 0.0;
  double left_residual = 0.0;
};

/// The eigenvalue of smallest modulus must be separated from the next one by
/// more than `separation_ratio` in modulus, and the eigenvector must align
/// with `analytic` to 1 - alignment_tol.
InvariantDirection find_invariant_direction(const MatrixRef& a_tilde,
                                            const VectorRef& analytic,
                                            double separation_ratio = 100.0,
                                            double alignment_tol = 1e-6);

/// Householder reflector H = I - 2 w w^T with H e_1 = s.
class Reflector {
 public:
  Reflector() = default;
  explicit Reflector(const VectorRef& s);

  /// x <- H x.
  void apply(Eigen::Ref<Vector> x) const;
  /// M <- H M H.
  void apply_two_sided(Matrix& m) const;
  const Vector& direction() const { return w_; }

 private:
  Vector w_;
};

struct DeflatedSystem {
  /// (H A~ H)[1:, 1:].
  Matrix a_hat;
  /// Columns b_i = (H b~_i)[1:].
  Matrix b_hat;
  Reflector reflector;
  Vector s_hat;
  /// ||(H A~ H)[1:, 0]|| and ||(H A~ H)[0, 1:]|| (absolute).
  double column_defect = 0.0;
  double row_defect = 0.0;
  /// (H A~ H)[0, 0] and <s, b~_i>.
  double corner = 0.0;
  Vector b_leading;
  double a_frobenius = 0.0;

  Eigen::Index dimension() const { return a_hat.rows(); }
  /// H [0; zeta].
  Vector lift(const VectorRef& zeta) const;
  /// (H z)[1:].
  Vector restrict(const VectorRef& z) const;
  /// (H N~ H)[1:, 1:], formed on demand.
  Matrix control_operator(const MatrixRef& n_tilde) const;
};

DeflatedSystem deflate(const MatrixRef& a_tilde, const MatrixRef& b_tilde,
                       const VectorRef& s_hat);

/// <y, 1>_Y for grid values y.
double mass(const VectorRef& y, const VectorRef& sqrt_weight);

}  // namespace hypoctl
