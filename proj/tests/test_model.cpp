#include <doctest.h>

#include <cmath>

#include "discretize.hpp"
#include "error.hpp"
#include "model.hpp"

using namespace hypoctl;

TEST_CASE("triple well values") {
  CHECK(triple_well(0.0).value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(triple_well(0.0).slope == doctest::Approx(0.14).epsilon(1e-15));
  CHECK(triple_well(1.0).value == doctest::Approx(0.9125).epsilon(1e-15));
}

TEST_CASE("triple well slope matches a central difference") {
  for (double x : {-3.1, -1.0, 0.4, 2.7}) {
    const double h = 1e-5;
    const double fd = (triple_well(x + h).value - triple_well(x - h).value) / (2 * h);
    CHECK(triple_well(x).slope == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("logistic shape values") {
  CHECK(logistic_shape(3, 1.0).value == doctest::Approx(1.0 / (std::exp(-2.0) + 1.0)));
  CHECK(logistic_shape(3, 1.0).value == doctest::Approx(0.8808).epsilon(1e-4));
  for (int i = 1; i <= 4; ++i) {
    const ValueSlope mid = logistic_shape(i, -(2.0 * i - 5.0));
    CHECK(mid.value == doctest::Approx(0.5));
    CHECK(mid.slope == doctest::Approx(0.25));
    const ValueSlope far = logistic_shape(i, 1e3);
    CHECK(far.value == 1.0);
    CHECK(far.slope == 0.0);
    const ValueSlope low = logistic_shape(i, -1e3);
    CHECK(low.value == 0.0);
    CHECK(std::isfinite(low.slope));
  }
}

TEST_CASE("potential validation") {
  CHECK_NOTHROW(ConfinementPotential::make_triple_well().validate());
  CHECK_NOTHROW(ConfinementPotential::make_polynomial({0, 0, 1}).validate());
  CHECK_THROWS_AS(ConfinementPotential::make_polynomial({0, 1}).validate(), Error);
  CHECK_THROWS_AS(ConfinementPotential::make_polynomial({0, 0, 0, 1}).validate(), Error);
  CHECK_THROWS_AS(ConfinementPotential::make_polynomial({0, 0, -1}).validate(), Error);
  ConfinementPotential p;
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("polynomial potential evaluates like the triple well") {
  const ConfinementPotential p =
      ConfinementPotential::make_polynomial({0.25, 0.14, 119.0 / 200, 0, -15.0 / 200, 0, 0.5 / 200});
  for (double x : {-2.0, 0.3, 1.7}) {
    CHECK(p.evaluate(x).value == doctest::Approx(triple_well(x).value).epsilon(1e-13));
    CHECK(p.evaluate(x).slope == doctest::Approx(triple_well(x).slope).epsilon(1e-13));
  }
}

TEST_CASE("tabulated shape interpolates and clamps") {
  const ControlShape s = ControlShape::tabulated({0, 1, 2}, {0, 1, 4}, {1, 2, 3});
  CHECK(s.evaluate(0.5).value == doctest::Approx(0.5));
  CHECK(s.evaluate(1.5).slope == doctest::Approx(2.5));
  CHECK(s.evaluate(-3.0).value == 0.0);
  CHECK(s.evaluate(9.0).value == 4.0);
  CHECK_THROWS_AS(ControlShape::tabulated({0, 0}, {1, 1}, {0, 0}).validate(), Error);
  CHECK_THROWS_AS(ControlShape::logistic(5).validate(), Error);
}

TEST_CASE("constant shape has zero slope") {
  const ControlShape s = ControlShape::constant_shape(2.0);
  CHECK(s.evaluate(1.3).value == 2.0);
  CHECK(s.evaluate(1.3).slope == 0.0);
}

TEST_CASE("invariant weight of the harmonic potential") {
  const PhaseGrid grid({-6, 6, 31}, {-6, 6, 31});
  const InvariantWeight w = invariant_weight(ConfinementPotential::make_quadratic(), grid);
  CHECK(w.density.sum() * grid.hx() * grid.hv() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.sqrt_weight.squaredNorm() == doctest::Approx(1.0).epsilon(1e-14));
  double asym = 0.0;
  double mean_v = 0.0;
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.nv(); ++j) {
      const double mu = w.density(grid.index(i, j));
      asym = std::max(asym, std::abs(mu - w.density(grid.index(grid.nx() - 1 - i,
                                                                grid.nv() - 1 - j))));
      mean_v += mu * grid.v()(j) * grid.hx() * grid.hv();
    }
  }
  CHECK(asym == 0.0);
  CHECK(std::abs(mean_v) < 1e-15);
}

TEST_CASE("invariant weight follows beta") {
  ConfinementPotential p = ConfinementPotential::make_quadratic();
  p.beta = 2.0;
  const PhaseGrid grid({-5, 5, 21}, {-5, 5, 21});
  const InvariantWeight w = invariant_weight(p, grid);
  const int c = 10;
  // mu(0, v) / mu(0, 0) = exp(-beta v^2 / 2).
  const double ratio = w.density(grid.index(c, c + 4)) / w.density(grid.index(c, c));
  const double v = grid.v()(c + 4);
  CHECK(ratio == doctest::Approx(std::exp(-v * v)).epsilon(1e-13));
}

TEST_CASE("describe strings are stable") {
  CHECK(ConfinementPotential::make_triple_well().describe() == "triple_well;gamma=1;beta=1");
  CHECK(ControlShape::logistic(2).describe() == "logistic:2");
}
