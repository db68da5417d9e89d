#pragma once

// Dense linear algebra and matrix-equation kernels.
//
// Eigendecompositions and the real Schur factorization are delegated to
// LAPACK; the Lyapunov solver (Bartels-Stewart on the real Schur form) and the
// small Riccati solver are implemented here.

#include <complex>
#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace hypoctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Eigenvalues sorted by descending real part (ties: descending imaginary
/// part), with unit-norm right and, on request, left eigenvectors. A left
/// eigenvector u_j satisfies u_j^H A = lambda_j u_j^H.
struct SpectrumResult {
  ComplexVector values;
  ComplexMatrix right;
  std::optional<ComplexMatrix> left;
};

struct EigOptions {
  bool right = true;
  bool left = false;
};

SpectrumResult eig(const MatrixRef& a, EigOptions options = {});

/// Eigenvalues only, same ordering as `eig`.
ComplexVector eigenvalues(const MatrixRef& a);

/// Ordering used by every spectrum in the project.
bool spectral_order(const std::complex<double>& a,
                    const std::complex<double>& b);

/// A = U S U^T with S quasi-upper-triangular. When a selection predicate was
/// given, the `selected` eigenvalues occupy the leading block of S.
struct SchurForm {
  Matrix u;
  Matrix s;
  Eigen::Index selected = 0;
  bool ordered = false;

  /// Eigenvalues read off the diagonal blocks of S, in block order.
  ComplexVector diagonal_eigenvalues() const;
};

using EigenvalueSelector = std::function<bool(const std::complex<double>&)>;

SchurForm real_schur(const MatrixRef& a, const EigenvalueSelector& select = {});

/// Solves A^T X + X A + Q = 0 for symmetric X. A must be stable; the result
/// is symmetrized before returning.
Matrix lyapunov_solve(const MatrixRef& a, const MatrixRef& q);

/// Same as `lyapunov_solve`, reusing a precomputed real Schur form of A.
Matrix lyapunov_solve(const SchurForm& schur, const MatrixRef& q);

/// Solves S_a^T Y + Y S_b = C in place for quasi-upper-triangular S_a, S_b.
void solve_quasi_triangular_sylvester(const MatrixRef& sa, const MatrixRef& sb,
                                      Eigen::Ref<Matrix> c);

/// Stabilizing solution of A^T P + P A + Q - P B R^{-1} B^T P = 0 through the
/// stable invariant subspace of the Hamiltonian matrix. Intended for small
/// problems.
Matrix care_small(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q,
                  const MatrixRef& r);

/// Orthonormal basis of the invariant subspace belonging to the eigenvalues
/// with Re(lambda) >= threshold.
Matrix stable_invariant_subspace(const MatrixRef& a, double threshold,
                                 double gap_tolerance = 1e-8);

/// Largest real part of the eigenvalues.
double spectral_abscissa(const ComplexVector& values);

Matrix kron(const MatrixRef& a, const MatrixRef& b);

}  // namespace hypoctl
