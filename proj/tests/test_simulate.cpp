#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "deflate.hpp"
#include "discretize.hpp"
#include "helpers.hpp"
#include "riccati.hpp"
#include "simulate.hpp"

using namespace hypoctl;

namespace {

struct SmallProblem {
  PhaseGrid grid{{-6, 6, 21}, {-6, 6, 21}};
  ConfinementPotential pot = ConfinementPotential::make_quadratic();
  OperatorBundle bundle;
  InvariantDirection dir;
  DeflatedSystem defl;
  std::unique_ptr<KroneckerOperators> ops;

  SmallProblem() {
    std::vector<ControlShape> shapes{ControlShape::logistic(1), ControlShape::logistic(3)};
    bundle = assemble_bundle(pot, shapes, grid);
    dir = find_invariant_direction(bundle.symmetrized, bundle.invariant_direction);
    defl = deflate(bundle.symmetrized, bundle.control_vectors(), dir.vector);
    ops = std::make_unique<KroneckerOperators>(pot, grid, bundle.controls);
  }
  std::vector<Matrix> n_hat() const {
    std::vector<Matrix> out;
    for (const ControlOperator& c : bundle.controls) out.push_back(defl.control_operator(c.symmetrized));
    return out;
  }
};

const SmallProblem& small() {
  static const SmallProblem p;
  return p;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("linear decay") {
  double y1 = 0.0;
  integrate_rk23([](double, const VectorRef& y, Eigen::Ref<Vector> dy) { dy = -y; },
                 Vector::Ones(1), 0.0, 1.0, {0.0, 1.0}, {},
                 [&](double t, const Vector& y) { if (t == 1.0) y1 = y(0); });
  CHECK(std::abs(y1 - std::exp(-1.0)) <= 1e-3 * std::exp(-1.0));
}

TEST_CASE("zero right-hand side keeps the state") {
  Vector y0(3);
  y0 << 1.5, -2.0, 0.25;
  std::vector<Vector> seen;
  integrate_rk23([](double, const VectorRef&, Eigen::Ref<Vector> dy) { dy.setZero(); }, y0, 0.0,
                 5.0, linspace(0, 5, 11), {}, [&](double, const Vector& y) { seen.push_back(y); });
  REQUIRE(seen.size() == 11);
  for (const Vector& y : seen) CHECK((y - y0).norm() <= 1e-15 * y0.norm());
}

TEST_CASE("harmonic oscillator returns after one period") {
  Vector y0(2);
  y0 << 1.0, 0.0;
  Vector end;
  const double period = 2.0 * std::numbers::pi;
  integrate_rk23(
      [](double, const VectorRef& y, Eigen::Ref<Vector> dy) {
        dy(0) = y(1);
        dy(1) = -y(0);
      },
      y0, 0.0, period, {period}, {}, [&](double, const Vector& y) { end = y; });
  CHECK((end - y0).norm() <= 5e-3);
}

TEST_CASE("tighter tolerances reduce the error") {
  auto run = [](double rtol) {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = rtol * 1e-3;
    double y1 = 0.0;
    integrate_rk23([](double, const VectorRef& y, Eigen::Ref<Vector> dy) { dy = -y; },
                   Vector::Ones(1), 0.0, 2.0, {2.0}, cfg,
                   [&](double, const Vector& y) { y1 = y(0); });
    return std::abs(y1 - std::exp(-2.0));
  };
  CHECK(run(1e-6) < run(1e-3));
}

TEST_CASE("decay fit of an exact exponential") {
  const std::vector<double> t = linspace(0, 40, 401);
  std::vector<double> n;
  for (double ti : t) n.push_back(std::exp(-0.3 * ti));
  const DecayFit fit = decay_fit(t, n);
  CHECK(std::abs(fit.slope + 0.3) <= 1e-6);
  CHECK(fit.points == 201);
  CHECK(fit.residual < 1e-10);
}

TEST_CASE("closed loop right-hand side") {
  const SmallProblem& p = small();
  const Eigen::Index n = p.defl.dimension();
  const auto n_hat = p.n_hat();
  std::mt19937_64 rng(3);
  const Matrix k = testing::random_matrix(rng, 2, n);
  const Vector zeta = testing::random_matrix(rng, n, 1);

  SUBCASE("equilibrium is a fixed point") {
    CHECK(closed_loop_rhs(Vector::Zero(n), p.defl.a_hat, n_hat, p.defl.b_hat, k).norm() == 0.0);
  }
  SUBCASE("zero gain is the linear system") {
    const Vector r = closed_loop_rhs(zeta, p.defl.a_hat, n_hat, p.defl.b_hat, Matrix());
    CHECK((r - p.defl.a_hat * zeta).norm() == 0.0);
  }
  SUBCASE("linearization at zero") {
    const Matrix lin = p.defl.a_hat - p.defl.b_hat * k;
    const double eps = 1e-7;
    const Vector fd =
        closed_loop_rhs(eps * zeta, p.defl.a_hat, n_hat, p.defl.b_hat, k) / eps;
    CHECK((fd - lin * zeta).norm() <= 1e-6 * (lin * zeta).norm());
  }
  SUBCASE("matrix-free model agrees with the dense form") {
    const ClosedLoopModel model(p.defl, *p.ops, p.bundle.sqrt_weight, k);
    Vector out(n);
    model.rhs(zeta, out);
    const Vector ref = closed_loop_rhs(zeta, p.defl.a_hat, n_hat, p.defl.b_hat, k);
    CHECK((out - ref).norm() <= 1e-11 * ref.norm());
  }
}

TEST_CASE("initial states") {
  const SmallProblem& p = small();
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - p.dir.alignment * p.dir.alignment));

  SUBCASE("zero amplitude is the constant state") {
    InitialParams ip;
    ip.amplitude = 0.0;
    const InitialState s = make_initial(ip, p.grid, p.bundle.weight, p.defl);
    CHECK((s.y0 - Vector::Ones(p.grid.size())).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(s.zeta0.norm() <= 1.01 * sin_theta + 1e-14);
  }
  SUBCASE("perturbed state has unit mass") {
    InitialParams ip;
    ip.amplitude = 0.5;
    const InitialState s = make_initial(ip, p.grid, p.bundle.weight, p.defl);
    CHECK(s.mass == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mass(s.y0, p.bundle.sqrt_weight) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.zeta0.norm() > 0.0);
  }
  SUBCASE("rotation by zero is the constant state") {
    InitialParams ip;
    ip.kind = InitialKind::kRotated;
    ip.theta = 0.0;
    const InitialState s = make_initial(ip, p.grid, p.bundle.weight, p.defl);
    CHECK((s.y0 - Vector::Ones(p.grid.size())).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("equilibrium has no deflated component") {
    InitialParams ip;
    ip.kind = InitialKind::kEquilibrium;
    const InitialState s = make_initial(ip, p.grid, p.bundle.weight, p.defl);
    CHECK(s.zeta0.norm() == 0.0);
  }
}

TEST_CASE("simulation from equilibrium stays there") {
  const SmallProblem& p = small();
  std::mt19937_64 rng(5);
  const ClosedLoopModel model(p.defl, *p.ops, p.bundle.sqrt_weight,
                              testing::random_matrix(rng, 2, p.defl.dimension()));
  InitialParams ip;
  ip.kind = InitialKind::kEquilibrium;
  const InitialState s = make_initial(ip, p.grid, p.bundle.weight, p.defl);
  SimulationConfig sc;
  sc.horizon = 5.0;
  sc.samples = 11;
  const Trajectory t = simulate(model, s, sc);
  for (double n : t.norms) CHECK(n <= 1e-12);
}

TEST_CASE("controlled simulation conserves mass and decays faster") {
  const SmallProblem& p = small();
  const RiccatiSolution sol = solve_shifted_riccati(p.defl.a_hat, p.defl.b_hat, 0.2, 1.0);
  InitialParams ip;
  ip.amplitude = 0.05;
  const InitialState s = make_initial(ip, p.grid, p.bundle.weight, p.defl);
  SimulationConfig sc;
  sc.horizon = 20.0;
  sc.samples = 201;
  sc.snapshot_times = {0.0, 10.0};
  sc.integrator.rtol = 1e-6;
  sc.integrator.atol = 1e-12;
  const Trajectory open = simulate(ClosedLoopModel(p.defl, *p.ops, p.bundle.sqrt_weight, Matrix()), s, sc);
  const Trajectory closed = simulate(ClosedLoopModel(p.defl, *p.ops, p.bundle.sqrt_weight, sol.gain), s, sc);
  for (const Trajectory* t : {&open, &closed}) {
    for (double m : t->mass) CHECK(std::abs(m - 1.0) <= 1e-6);
    CHECK(t->snapshots.size() == 2);
  }
  CHECK(decay_fit(closed.times, closed.norms).slope < decay_fit(open.times, open.norms).slope);
  CHECK(closed.controls.rows() == 201);
  CHECK(open.controls.cwiseAbs().maxCoeff() == 0.0);
}
