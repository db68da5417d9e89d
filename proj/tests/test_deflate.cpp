#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "deflate.hpp"
#include "discretize.hpp"
#include "error.hpp"
#include "helpers.hpp"

using namespace hypoctl;

namespace {

std::vector<ControlShape> logistic_shapes() {
  std::vector<ControlShape> s;
  for (int i = 1; i <= 4; ++i) s.push_back(ControlShape::logistic(i));
  return s;
}

/// Largest distance from an element of `sub` to its nearest unused partner
/// in `full`.
double multiset_distance(const ComplexVector& sub, const ComplexVector& full) {
  std::vector<bool> used(full.size(), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sub.size(); ++i) {
    Eigen::Index best = -1;
    double dist = 1e300;
    for (Eigen::Index j = 0; j < full.size(); ++j) {
      if (!used[j] && std::abs(full(j) - sub(i)) < dist) {
        dist = std::abs(full(j) - sub(i));
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, dist);
  }
  return worst;
}

}  // namespace

TEST_CASE("reflector maps e1 to s and is an involution") {
  std::mt19937_64 rng(1);
  Vector s = testing::random_matrix(rng, 7, 1);
  s.normalize();
  const Reflector h(s);
  Vector e1 = Vector::Unit(7, 0);
  h.apply(e1);
  CHECK((e1 - s).norm() < 1e-15);
  Vector x = testing::random_matrix(rng, 7, 1);
  Vector y = x;
  h.apply(y);
  CHECK(y.norm() == doctest::Approx(x.norm()).epsilon(1e-15));
  h.apply(y);
  CHECK((y - x).norm() < 1e-14);
}

TEST_CASE("reflector for s = e1 is the identity on the complement") {
  const Reflector h(Vector::Unit(4, 0));
  Vector x(4);
  x << 1, 2, 3, 4;
  Vector y = x;
  h.apply(y);
  CHECK((y - x).norm() < 1e-15);
}

TEST_CASE("exactly invariant direction deflates with vanishing border") {
  std::mt19937_64 rng(4);
  const int n = 12;
  Vector s = testing::random_matrix(rng, n, 1).cwiseAbs();
  s.normalize();
  const Matrix p = Matrix::Identity(n, n) - s * s.transpose();
  const Matrix a = p * testing::random_matrix(rng, n, n) * p;
  const Matrix b = p * testing::random_matrix(rng, n, 2);
  const DeflatedSystem d = deflate(a, b, s);
  CHECK(d.dimension() == n - 1);
  CHECK(d.column_defect <= 1e-14 * a.norm());
  CHECK(d.row_defect <= 1e-14 * a.norm());
  CHECK(d.b_leading.cwiseAbs().maxCoeff() < 1e-14);
  // The deflated spectrum is the full one without the zero eigenvalue.
  ComplexVector full = eigenvalues(a);
  const ComplexVector sub = eigenvalues(d.a_hat);
  CHECK(multiset_distance(sub, full) < 1e-10);

  std::mt19937_64 rng2(9);
  const Vector zeta = testing::random_matrix(rng2, n - 1, 1);
  const Vector z = d.lift(zeta);
  CHECK(std::abs(z.dot(s)) < 1e-14);
  CHECK((d.restrict(z) - zeta).norm() < 1e-14);
}

TEST_CASE("deflate rejects a non-unit direction") {
  CHECK_THROWS_AS(deflate(Matrix::Identity(3, 3), Matrix::Zero(3, 1), Vector::Ones(3)), Error);
}

TEST_CASE("mass of constants and odd moments") {
  const PhaseGrid grid({-6, 6, 31}, {-6, 6, 31});
  const InvariantWeight w = invariant_weight(ConfinementPotential::make_triple_well(), grid);
  CHECK(mass(Vector::Ones(grid.size()), w.sqrt_weight) == doctest::Approx(1.0).epsilon(1e-14));
  Vector v(grid.size());
  for (int i = 0; i < grid.nx(); ++i)
    for (int j = 0; j < grid.nv(); ++j) v(grid.index(i, j)) = grid.v()(j);
  CHECK(std::abs(mass(v, w.sqrt_weight)) < 1e-12);
}

TEST_CASE("harmonic potential null direction is the square root Gaussian") {
  const ConfinementPotential pot = ConfinementPotential::make_quadratic();
  const PhaseGrid grid({-6, 6, 31}, {-6, 6, 31});
  const OperatorBundle b = assemble_bundle(pot, logistic_shapes(), grid);
  const InvariantDirection dir = find_invariant_direction(b.symmetrized, b.invariant_direction);
  Vector g(grid.size());
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.nv(); ++j) {
      const double x = grid.x()(i);
      const double v = grid.v()(j);
      g(grid.index(i, j)) = std::exp(-(x * x / 2 + v * v / 2) / 2);
    }
  }
  g.normalize();
  CHECK(dir.vector.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(1.0 - std::abs(dir.vector.dot(g)) <= 1e-6);
  CHECK(dir.vector.sum() > 0.0);
}

TEST_CASE("triple well at the default grid") {
  const ConfinementPotential pot = ConfinementPotential::make_triple_well();
  const PhaseGrid grid({-5, 5, 41}, {-5, 5, 41});
  const OperatorBundle b = assemble_bundle(pot, logistic_shapes(), grid);
  const InvariantDirection dir = find_invariant_direction(b.symmetrized, b.invariant_direction);
  CHECK(dir.right_residual <= 1e-6);
  CHECK(std::abs(dir.eigenvalue) * 100.0 < dir.next_modulus);

  const DeflatedSystem d = deflate(b.symmetrized, b.control_vectors(), dir.vector);
  CHECK(d.b_leading.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(d.column_defect <= 1e-12 * d.a_frobenius);

  SUBCASE("deflated spectrum is the full one minus the null mode") {
    const ComplexVector full = eigenvalues(b.symmetrized);
    const ComplexVector sub = eigenvalues(d.a_hat);
    CHECK(multiset_distance(sub, full) < 1e-6);
  }
}

TEST_CASE("too coarse a grid is reported with a hint") {
  const ConfinementPotential pot = ConfinementPotential::make_triple_well();
  const PhaseGrid grid({-3.5, 3.5, 21}, {-3.5, 3.5, 21});
  const OperatorBundle b = assemble_bundle(pot, logistic_shapes(), grid);
  try {
    find_invariant_direction(b.symmetrized, b.invariant_direction);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
    CHECK(std::strstr(e.what(), "grid") != nullptr);
  }
}
