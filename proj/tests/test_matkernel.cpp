#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "matkernel.hpp"
#include "oracle.hpp"
#include "riccati.hpp"

using namespace hypoctl;
using std::complex;

namespace {

bool contains(const ComplexVector& values, complex<double> z, double tol) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i) - z) <= tol) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("eig of a rotation is +-i") {
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  const ComplexVector v = eigenvalues(a);
  CHECK(contains(v, {0, 1}, 1e-14));
  CHECK(contains(v, {0, -1}, 1e-14));
}

TEST_CASE("eig of a diagonal matrix returns the axes") {
  Matrix a = Vector::LinSpaced(3, -1, -3).asDiagonal();
  const SpectrumResult r = eig(a, {.right = true, .left = true});
  REQUIRE(r.values.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(r.values(k).real() == doctest::Approx(-1.0 - k));
    CHECK(std::abs(r.right(k, k)) == doctest::Approx(1.0));
  }
}

TEST_CASE("eig of a companion matrix") {
  Matrix a(2, 2);
  a << 0, 1, -2, -2;
  const SpectrumResult r = eig(a, {.right = true, .left = true});
  CHECK(contains(r.values, {-1, 1}, 1e-14));
  CHECK(contains(r.values, {-1, -1}, 1e-14));
  // Ordering: descending real part, then descending imaginary part.
  CHECK(r.values(0).imag() > 0.0);
  for (int k = 0; k < 2; ++k) {
    const ComplexMatrix ac = a.cast<complex<double>>();
    CHECK((ac * r.right.col(k) - r.values(k) * r.right.col(k)).norm() < 1e-13);
    const ComplexVector u = r.left->col(k);
    CHECK((u.adjoint() * ac - r.values(k) * u.adjoint()).norm() < 1e-13);
  }
}

TEST_CASE("real_schur of a symmetric matrix is diagonal") {
  std::mt19937_64 rng(3);
  const Matrix c = testing::random_matrix(rng, 6, 6);
  const Matrix a = c + c.transpose();
  const SchurForm f = real_schur(a);
  Matrix off = f.s;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() < 1e-10);
  CHECK((f.u * f.s * f.u.transpose() - a).norm() < 1e-12 * a.norm());
  CHECK((f.u.transpose() * f.u - Matrix::Identity(6, 6)).norm() < 1e-13);
}

TEST_CASE("real_schur puts selected eigenvalues first") {
  Matrix a(2, 2);
  a << -1, 0, 0, 1;
  const SchurForm f = real_schur(a, [](complex<double> z) { return z.real() > 0.0; });
  CHECK(f.selected == 1);
  CHECK(f.s(0, 0) == doctest::Approx(1.0));
  CHECK(f.s(1, 1) == doctest::Approx(-1.0));
}

TEST_CASE("real_schur leaves an ordered triangular matrix alone") {
  Matrix a(3, 3);
  a << 3, 1, 2, 0, 2, 1, 0, 0, 1;
  const SchurForm f = real_schur(a);
  CHECK((f.u.cwiseAbs() - Matrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("lyapunov_solve closed forms") {
  CHECK(lyapunov_solve(Matrix::Constant(1, 1, -2.0), Matrix::Constant(1, 1, 3.0))(0, 0) ==
        doctest::Approx(0.75).epsilon(1e-15));
  const Matrix x = lyapunov_solve(-Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  CHECK((x - 0.5 * Matrix::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("lyapunov_solve agrees with the Kronecker oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const Matrix a = testing::random_stable(rng, n, 0.2);
    const Matrix c = testing::random_matrix(rng, n, n);
    const Matrix q = c * c.transpose();
    const Matrix x = lyapunov_solve(a, q);
    const Matrix ref = oracle::lyapunov_kronecker(a, q);
    CAPTURE(trial);
    CHECK((x - ref).norm() <= 1e-10 * ref.norm());
    CHECK((x - x.transpose()).norm() == 0.0);
    // Q positive semidefinite and A stable give X positive semidefinite.
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(x).eigenvalues().minCoeff() > -1e-10 * x.norm());
  }
}

TEST_CASE("lyapunov_solve is linear in Q") {
  std::mt19937_64 rng(5);
  const Matrix a = testing::random_stable(rng, 5, 0.3);
  const Matrix c = testing::random_matrix(rng, 5, 5);
  const Matrix q = c + c.transpose();
  CHECK((lyapunov_solve(a, 10.0 * q) - 10.0 * lyapunov_solve(a, q)).norm() <
        1e-11 * lyapunov_solve(a, q).norm() * 10.0);
}

TEST_CASE("care_small scalar closed form") {
  const Matrix one = Matrix::Constant(1, 1, 1.0);
  const double pi = care_small(one, one, one, one)(0, 0);
  CHECK(std::abs(pi - (1.0 + std::numbers::sqrt2)) <= 1e-12);
  CHECK(std::abs((1.0 - pi) + std::numbers::sqrt2) <= 1e-12);
  CHECK(pi == doctest::Approx(oracle::scalar_care(1, 1, 1, 1)));
}

TEST_CASE("care_small with zero cost and stable A is zero") {
  const Matrix pi = care_small(Matrix::Constant(1, 1, -1.0), Matrix::Zero(1, 1),
                               Matrix::Zero(1, 1), Matrix::Constant(1, 1, 1.0));
  CHECK(std::abs(pi(0, 0)) < 1e-14);
}

TEST_CASE("care_small matches the Newton fixed point") {
  Matrix a = Vector::LinSpaced(2, 1, 2).asDiagonal();
  const Matrix b = Matrix::Ones(2, 1);
  const Matrix q = Matrix::Identity(2, 2);
  const Matrix r = Matrix::Ones(1, 1);
  const Matrix ref = care_small(a, b, q, r);
  const InitialGuess init = stabilizing_init(a, b, r);
  RiccatiOptions opts;
  opts.step_tol = 1e-12;
  opts.residual_tol = 1e-14;
  const RiccatiSolution sol = kleinman_newton(a, b, q, r, init.pi, opts);
  CHECK((sol.pi - ref).norm() <= 1e-10 * ref.norm());
  CHECK(riccati_residual(a, b, q, r, ref) < 1e-12);
}

TEST_CASE("stable_invariant_subspace picks the unstable axis") {
  Matrix a(2, 2);
  a << 1, 0, 0, -1;
  const Matrix v = stable_invariant_subspace(a, 0.0);
  REQUIRE(v.cols() == 1);
  CHECK(std::abs(v(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(v(1, 0)) < 1e-14);
}

TEST_CASE("stable_invariant_subspace keeps conjugate pairs together") {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 0) = 0.5;
  a(0, 1) = 2.0;
  a(1, 0) = -2.0;
  a(1, 1) = 0.5;
  a(2, 2) = -1.0;
  a(3, 3) = -3.0;
  std::mt19937_64 rng(2);
  const Matrix q = testing::random_matrix(rng, 4, 4).householderQr().householderQ();
  const Matrix b = q * a * q.transpose();
  const Matrix v = stable_invariant_subspace(b, 0.0);
  REQUIRE(v.cols() == 2);
  CHECK((v.transpose() * v - Matrix::Identity(2, 2)).norm() < 1e-13);
  // Invariance: B V = V (V^T B V).
  CHECK((b * v - v * (v.transpose() * b * v)).norm() < 1e-12);
}

TEST_CASE("kron matches the definition") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  const Matrix k = kron(a, Matrix::Identity(2, 2));
  CHECK(k(0, 2) == 2.0);
  CHECK(k(3, 1) == 3.0);
  CHECK(k(1, 1) == 1.0);
}
