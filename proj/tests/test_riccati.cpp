#include <doctest.h>

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "helpers.hpp"
#include "oracle.hpp"
#include "riccati.hpp"

using namespace hypoctl;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("scalar Newton iterates") {
  std::vector<double> iterates;
  RiccatiOptions opts;
  opts.step_tol = 1e-12;
  opts.residual_tol = 1e-14;
  const RiccatiSolution sol =
      kleinman_newton(scalar(1), scalar(1), scalar(1), scalar(1), scalar(3.0), opts,
                      [&](const RiccatiIterate&, const Matrix& pi) { iterates.push_back(pi(0, 0)); });
  REQUIRE(iterates.size() >= 3);
  CHECK(std::abs(iterates[0] - 2.5) <= 1e-5);
  CHECK(std::abs(iterates[1] - 2.41667) <= 1e-5);
  double p = 3.0;
  for (double it : iterates) {
    p = oracle::scalar_newton_step(1, 1, 1, 1, p);
    CHECK(std::abs(it - p) <= 1e-12);
  }
  CHECK(sol.pi(0, 0) == doctest::Approx(1.0 + std::numbers::sqrt2).epsilon(1e-14));
  CHECK(sol.history.back().update_norm < 1e-12);
}

TEST_CASE("starting at the solution takes one zero step") {
  const double exact = 1.0 + std::numbers::sqrt2;
  const RiccatiSolution sol =
      kleinman_newton(scalar(1), scalar(1), scalar(1), scalar(1), scalar(exact));
  REQUIRE(sol.history.size() == 1);
  CHECK(sol.history[0].update_norm < 1e-14);
}

TEST_CASE("Newton agrees with the Hamiltonian solver on random data") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = testing::random_matrix(rng, 6, 6);
    const Matrix b = testing::random_matrix(rng, 6, 2);
    const Matrix q = Matrix::Identity(6, 6);
    const Matrix r = Matrix::Identity(2, 2);
    const InitialGuess init = stabilizing_init(a, b, r);
    RiccatiOptions opts;
    opts.step_tol = 1e-8;
    opts.residual_tol = 1e-12;
    const RiccatiSolution sol = kleinman_newton(a, b, q, r, init.pi, opts);
    const Matrix ref = care_small(a, b, q, r);
    CAPTURE(trial);
    CHECK((sol.pi - ref).norm() <= 1e-8 * ref.norm());
    CHECK(spectral_abscissa(sol.closed_loop) < 0.0);
  }
}

TEST_CASE("Newton iterates decrease monotonically after the first step") {
  std::mt19937_64 rng(13);
  const Matrix a = testing::random_matrix(rng, 5, 5);
  const Matrix b = testing::random_matrix(rng, 5, 1);
  const Matrix r = Matrix::Identity(1, 1);
  std::vector<Matrix> iterates;
  RiccatiOptions opts;
  opts.step_tol = 1e-10;
  kleinman_newton(a, b, Matrix::Identity(5, 5), r, stabilizing_init(a, b, r).pi, opts,
                  [&](const RiccatiIterate&, const Matrix& pi) { iterates.push_back(pi); });
  REQUIRE(iterates.size() >= 3);
  for (std::size_t k = 1; k + 1 < iterates.size(); ++k) {
    const Matrix diff = iterates[k] - iterates[k + 1];
    const double low = Eigen::SelfAdjointEigenSolver<Matrix>(diff).eigenvalues().minCoeff();
    CHECK(low >= -1e-9 * iterates[k].norm());
  }
}

TEST_CASE("initializer") {
  SUBCASE("stable system needs no initial feedback") {
    const Matrix a = Vector::LinSpaced(3, -1, -3).asDiagonal();
    const InitialGuess g = stabilizing_init(a, Matrix::Ones(3, 1), Matrix::Identity(1, 1));
    CHECK(g.dimension == 0);
    CHECK(g.pi.norm() == 0.0);
  }
  SUBCASE("scalar unstable system") {
    const InitialGuess g = stabilizing_init(scalar(0.1), scalar(1), scalar(1));
    CHECK(g.dimension == 1);
    CHECK(g.pi(0, 0) == doctest::Approx(0.1 + std::sqrt(0.01 + 1.0)).epsilon(1e-12));
    CHECK(g.pi(0, 0) == doctest::Approx(1.105).epsilon(1e-3));
    CHECK(0.1 - g.pi(0, 0) < 0.0);
    CHECK(g.pi(0, 0) == doctest::Approx(oracle::scalar_care(0.1, 1, 1, 1)).epsilon(1e-12));
  }
  SUBCASE("unreachable unstable mode is refused") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 0.5;
    a(1, 1) = -1.0;
    Matrix b = Matrix::Zero(2, 1);
    b(1, 0) = 1.0;
    CHECK_THROWS_AS(stabilizing_init(a, b, Matrix::Identity(1, 1)), Error);
  }
}

TEST_CASE("feedback gain") {
  CHECK(feedback_gain(Matrix::Zero(3, 3), Matrix::Ones(3, 2), 1.0).norm() == 0.0);
  const Matrix k = feedback_gain(scalar(1.0 + std::numbers::sqrt2), scalar(1), 1.0);
  CHECK(k(0, 0) == doctest::Approx(1.0 + std::numbers::sqrt2));
  CHECK_THROWS_AS(feedback_gain(scalar(1), scalar(1), 0.0), Error);
}

TEST_CASE("cost weight changes the gain but keeps the shift") {
  std::mt19937_64 rng(31);
  const Matrix a = testing::random_stable(rng, 6, 0.02);
  const Matrix b = testing::random_matrix(rng, 6, 2);
  const RiccatiSolution one = solve_shifted_riccati(a, b, 0.3, 1.0);
  const RiccatiSolution two = solve_shifted_riccati(a, b, 0.3, 2.0);
  CHECK((one.gain - two.gain).norm() > 1e-6);
  CHECK(spectral_abscissa(one.closed_loop) < 0.0);
  CHECK(spectral_abscissa(two.closed_loop) < 0.0);
  CHECK(one.residual <= 1e-8);
  CHECK(two.residual <= 1e-8);
}

TEST_CASE("shifted solve moves the abscissa past -delta") {
  std::mt19937_64 rng(17);
  const Matrix a = testing::random_stable(rng, 10, 0.01);
  const Matrix b = testing::random_matrix(rng, 10, 3);
  const RiccatiSolution s = solve_shifted_riccati(a, b, 0.25, 1.0);
  CHECK(spectral_abscissa(s.closed_loop) - 0.25 < -0.25);
  const Matrix ad = a + 0.25 * Matrix::Identity(10, 10);
  CHECK(riccati_residual(ad, b, Matrix::Identity(10, 10), Matrix::Identity(3, 3), s.pi) <= 1e-8);
  CHECK((s.pi - s.pi.transpose()).norm() == 0.0);
}

TEST_CASE("non-stabilizing start is reported") {
  CHECK_THROWS_AS(kleinman_newton(scalar(1), scalar(1), scalar(1), scalar(1), scalar(0.5)),
                  Error);
}
