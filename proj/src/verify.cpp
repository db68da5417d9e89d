#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <random>

#include "error.hpp"
#include "oracle.hpp"
#include "pipeline.hpp"

namespace hypoctl {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool passed = false;
  std::string measured;
};

/// Default problem shared by checks 7 to 11, built on first use.
class SharedProblem {
 public:
  explicit SharedProblem(const RunConfig& config) : config_(config) {}

  const Problem& problem() {
    if (!problem_) problem_ = std::make_unique<Problem>(config_);
    return *problem_;
  }
  const StabilizabilityReport& report() {
    if (!report_) report_ = problem().analyze();
    return *report_;
  }
  const StoredGain& gain() {
    if (!gain_) gain_ = problem().solve_riccati();
    return *gain_;
  }

 private:
  RunConfig config_;
  std::unique_ptr<Problem> problem_;
  std::optional<StabilizabilityReport> report_;
  std::optional<StoredGain> gain_;
};

SimulationConfig acceptance_sim(const Problem& p) {
  SimulationConfig sc = p.simulation_config();
  sc.horizon = 40.0;
  sc.samples = 401;
  sc.snapshot_times.clear();
  sc.integrator.rtol = 1e-6;
  sc.integrator.atol = 1e-12;
  return sc;
}

double mass_drift(const Trajectory& t) {
  double d = 0.0;
  for (double m : t.mass) d = std::max(d, std::abs(m - 1.0));
  return d;
}

Outcome check_diff_matrices(const RunConfig& cfg) {
  const PhaseGrid grid = cfg.grid();
  double skew = 0.0;
  double sym = 0.0;
  double band = 0.0;
  for (const auto& [half, h] : {std::pair{(grid.nx() - 1) / 2, grid.hx()},
                                std::pair{(grid.nv() - 1) / 2, grid.hv()}}) {
    const DiffMatrices d = sinc_diff_matrices(half, h);
    skew = std::max(skew, symmetry_defect(d.first, -1));
    sym = std::max(sym, symmetry_defect(d.second, 1));
    band = std::max(band, bandlimited_derivative_error(d, half, h));
  }
  return {skew == 0.0 && sym == 0.0 && band <= 1e-6,
          "skew " + sci(skew) + ", sym " + sci(sym) + ", bandlimited rel err " + sci(band)};
}

Outcome check_kernel(const RunConfig& cfg) {
  const Matrix a = assemble_generator_direct(cfg.potential, cfg.grid());
  const double worst = (a * Vector::Ones(a.cols())).cwiseAbs().maxCoeff();
  const double inf_norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  return {worst <= 1e-12 * inf_norm,
          "max|A1| " + sci(worst) + " vs 1e-12*|A|_inf " + sci(1e-12 * inf_norm)};
}

Outcome check_kramers() {
  const ConfinementPotential pot = ConfinementPotential::make_quadratic(1.0);
  const PhaseGrid grid({-6.0, 6.0, 41}, {-6.0, 6.0, 41});
  const Matrix a = assemble_generator_symmetrized(pot, grid);
  ComplexVector values = eigenvalues(a);
  std::vector<std::complex<double>> computed(values.data(), values.data() + values.size());
  std::sort(computed.begin(), computed.end(), spectral_order);
  const auto expected = oracle::kramers_eigenvalues(pot.gamma, pot.omega, 2);
  computed.resize(expected.size());
  // Greedy nearest matching without reuse.
  std::vector<bool> used(computed.size(), false);
  double worst = 0.0;
  for (const auto& e : expected) {
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < computed.size(); ++j) {
      if (!used[j] && std::abs(computed[j] - e) < dist) {
        dist = std::abs(computed[j] - e);
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, dist);
  }
  return {worst <= 1e-2,
          "top " + std::to_string(expected.size()) + " eigenvalues, max err " + sci(worst)};
}

Outcome check_dissipativity(const RunConfig& cfg) {
  auto refined = [&](int points) {
    AxisSpec x = cfg.x_axis;
    AxisSpec v = cfg.v_axis;
    x.points = points;
    v.points = points;
    return PhaseGrid(x, v);
  };
  const DissipativityDefect coarse = dissipativity_defect(cfg.potential, refined(41));
  const DissipativityDefect fine = dissipativity_defect(cfg.potential, refined(61));
  return {coarse.relative() <= 1e-3 && fine.relative() < coarse.relative(),
          "rel defect 41: " + sci(coarse.relative()) + ", 61: " + sci(fine.relative())};
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Outcome check_lyapunov(unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(2, 8);
  std::uniform_real_distribution<double> margin(0.1, 1.0);
  double worst_diff = 0.0;
  double worst_res = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    Matrix a = random_matrix(rng, n, n);
    a -= (spectral_abscissa(eigenvalues(a)) + margin(rng)) * Matrix::Identity(n, n);
    const Matrix c = random_matrix(rng, n, n);
    const Matrix q = c + c.transpose();
    const Matrix x = lyapunov_solve(a, q);
    const Matrix x_ref = oracle::lyapunov_kronecker(a, q);
    worst_diff = std::max(worst_diff, (x - x_ref).norm() / x_ref.norm());
    const Matrix r = a.transpose() * x + x * a + q;
    worst_res = std::max(worst_res, r.norm() / (2.0 * a.norm() * x.norm() + q.norm()));
  }
  return {worst_diff <= 1e-10 && worst_res <= 1e-10,
          "200 systems, max rel diff " + sci(worst_diff) + ", max residual " + sci(worst_res)};
}

Outcome check_small_are(unsigned long seed) {
  const Matrix one = Matrix::Constant(1, 1, 1.0);
  const double pi_exact = 1.0 + std::numbers::sqrt2;
  const double care_err = std::abs(care_small(one, one, one, one)(0, 0) - pi_exact);

  std::vector<double> iterates;
  RiccatiOptions opts;
  opts.step_tol = 1e-12;
  opts.residual_tol = 1e-14;
  kleinman_newton(one, one, one, one, Matrix::Constant(1, 1, 3.0), opts,
                  [&](const RiccatiIterate&, const Matrix& pi) { iterates.push_back(pi(0, 0)); });
  double seq_err = 0.0;
  double p = 3.0;
  for (std::size_t k = 0; k < std::min<std::size_t>(iterates.size(), 4); ++k) {
    p = oracle::scalar_newton_step(1.0, 1.0, 1.0, 1.0, p);
    seq_err = std::max(seq_err, std::abs(iterates[k] - p));
  }
  const bool literal = iterates.size() >= 2 && std::abs(iterates[0] - 2.5) <= 1e-5 &&
                       std::abs(iterates[1] - 2.41667) <= 1e-5;

  std::mt19937_64 rng(seed + 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 6, 6);
    const Matrix b = random_matrix(rng, 6, 2);
    const Matrix q = Matrix::Identity(6, 6);
    const Matrix r = Matrix::Identity(2, 2);
    const Matrix ref = care_small(a, b, q, r);
    const InitialGuess init = stabilizing_init(a, b, r);
    RiccatiOptions kn;
    kn.step_tol = 1e-8;
    kn.residual_tol = 1e-12;
    const RiccatiSolution sol = kleinman_newton(a, b, q, r, init.pi, kn);
    worst = std::max(worst, (sol.pi - ref).norm() / ref.norm());
  }
  return {care_err <= 1e-12 && seq_err <= 1e-5 && literal && worst <= 1e-8,
          "care err " + sci(care_err) + ", KN seq err " + sci(seq_err) +
              ", care vs KN (20 x n=6) " + sci(worst)};
}

Outcome check_hautus(SharedProblem& shared) {
  const StabilizabilityReport& rep = shared.report();
  double weakest = std::numeric_limits<double>::infinity();
  bool all = !rep.modes.empty();
  for (const HautusMode& m : rep.modes) {
    weakest = std::min(weakest, m.max_magnitude);
    all = all && m.passed && m.max_magnitude > 1e-8;
  }
  return {rep.unstable_count() == 2 && all && rep.passed,
          std::to_string(rep.unstable_count()) + " modes above -delta, weakest magnitude " +
              sci(weakest)};
}

Outcome check_riccati(SharedProblem& shared, double delta) {
  const StoredGain& g = shared.gain();
  const double update = g.history.empty() ? 0.0 : g.history.back().update_norm;
  const double abscissa = spectral_abscissa(g.closed_loop);
  return {g.residual <= 1e-8 && g.history.size() <= 50 && update < 1e-5 &&
              abscissa < -delta + 1e-6,
          std::to_string(g.history.size()) + " iterations, last update " + sci(update) +
              ", residual " + sci(g.residual) + ", abscissa " + sci(abscissa)};
}

Outcome check_decay(SharedProblem& shared) {
  const Problem& p = shared.problem();
  const SimulationConfig sc = acceptance_sim(p);
  InitialParams init;
  init.kind = InitialKind::kPerturbed;
  init.amplitude = 0.05;
  const double lambda = shared.report().eigenvalues(0).real();
  const Trajectory open = p.simulate(Matrix(), init, sc);
  const Trajectory closed = p.simulate(shared.gain().gain, init, sc);
  const double s_open = decay_fit(open.times, open.norms).slope;
  const double s_closed = decay_fit(closed.times, closed.norms).slope;
  const double drift = std::max(mass_drift(open), mass_drift(closed));
  return {std::abs(s_open - lambda) <= 0.02 && s_closed <= -0.18 &&
              s_closed <= s_open - 0.05 && drift <= 1e-6,
          "uncontrolled " + sci(s_open) + " (Re lambda " + sci(lambda) + "), controlled " +
              sci(s_closed) + ", mass drift " + sci(drift)};
}

Outcome check_rotated(SharedProblem& shared) {
  const Problem& p = shared.problem();
  InitialParams init;
  init.kind = InitialKind::kRotated;
  init.theta = 0.5;
  const Trajectory t = p.simulate(shared.gain().gain, init, acceptance_sim(p));
  const double ratio = t.norms.back() / t.norms.front();
  return {std::isfinite(ratio) && ratio <= 1e-2, "terminal/initial " + sci(ratio)};
}

struct RunOutputs {
  std::string analysis;
  std::string spectrum;
  std::string operators;
  std::string gain;
  std::string history;
  std::string open_csv;
  std::string closed_csv;
  std::string closed_summary;
  std::string snapshots;
};

RunOutputs run_pipeline(const RunConfig& cfg) {
  const Problem p(cfg);
  RunOutputs out;
  const StabilizabilityReport rep = p.analyze();
  out.analysis = p.analysis_json(rep);
  out.spectrum = p.spectrum_csv(rep);
  out.operators = encode_container(p.operators_container());
  const StoredGain g = p.solve_riccati();
  out.gain = encode_container(g.to_container());
  out.history = g.history_csv();
  out.open_csv = trajectory_csv(p.simulate(Matrix()));
  const Trajectory closed = p.simulate(g.gain);
  out.closed_csv = trajectory_csv(closed);
  out.closed_summary = trajectory_summary_json(closed, true, cfg);
  out.snapshots = encode_container(snapshots_container(closed, p.grid(), g.metadata));
  return out;
}

Outcome check_determinism(SharedProblem& shared, const RunConfig& cfg) {
  const Problem& p = shared.problem();
  InitialParams eq;
  eq.kind = InitialKind::kEquilibrium;
  const Trajectory t = p.simulate(shared.gain().gain, eq, acceptance_sim(p));
  const double worst = *std::max_element(t.norms.begin(), t.norms.end());

  // The triple well needs about 29 points per axis before its null mode is
  // resolved, too slow to solve twice here; reruns use harmonic confinement.
  RunConfig small = cfg;
  small.potential.kind = ConfinementPotential::Kind::kQuadratic;
  small.potential.omega = 1.0;
  small.x_axis = {-6.0, 6.0, 21};
  small.v_axis = {-6.0, 6.0, 21};
  small.horizon = 10.0;
  small.samples = 101;
  small.snapshot_times = {0.0, 5.0, 10.0};
  small.initial = InitialParams{};
  const RunOutputs first = run_pipeline(small);
  const RunOutputs second = run_pipeline(small);
  const bool same = first.analysis == second.analysis && first.spectrum == second.spectrum &&
                    first.operators == second.operators && first.gain == second.gain &&
                    first.history == second.history && first.open_csv == second.open_csv &&
                    first.closed_csv == second.closed_csv &&
                    first.closed_summary == second.closed_summary &&
                    first.snapshots == second.snapshots;
  return {worst <= 1e-12 && same, "equilibrium max norm " + sci(worst) +
                                      (same ? ", reruns bitwise identical"
                                            : ", reruns differ")};
}

struct CheckSpec {
  int id;
  const char* name;
  double budget;
};

constexpr CheckSpec kChecks[] = {
    {1, "differentiation matrix exactness", 1.0},
    {2, "generator kernel contains constants", 1.0},
    {3, "Kramers spectrum of the quadratic potential", 30.0},
    {4, "dissipativity defect and refinement", 5.0},
    {5, "Lyapunov solver vs Kronecker oracle", 10.0},
    {6, "scalar and small Riccati closed forms", 10.0},
    {7, "unstable count and Hautus test", 60.0},
    {8, "Riccati residual, stopping rule and abscissa", 120.0},
    {9, "decay rates with and without feedback", 120.0},
    {10, "rotated initial state", 180.0},
    {11, "equilibrium fixed point and determinism", 10.0},
};

}  // namespace

int acceptance_count() { return static_cast<int>(std::size(kChecks)); }

double symmetry_defect(const MatrixRef& d, int sign) {
  return (d - static_cast<double>(sign) * d.transpose()).cwiseAbs().maxCoeff();
}

double bandlimited_derivative_error(const DiffMatrices& d, int half_points,
                                    double spacing) {
  const double w = std::numbers::pi / (4.0 * spacing);
  Vector f(2 * half_points + 1);
  for (int j = -half_points; j <= half_points; ++j) f(j + half_points) = std::sin(w * j * spacing);
  const Vector df = d.first * f;
  double worst = 0.0;
  for (int j = -half_points / 2; j <= half_points / 2; ++j) {
    const double exact = w * std::cos(w * j * spacing);
    worst = std::max(worst, std::abs(df(j + half_points) - exact));
  }
  return worst / w;
}

DissipativityDefect dissipativity_defect(const ConfinementPotential& potential,
                                         const PhaseGrid& grid) {
  const Matrix a = assemble_generator_direct(potential, grid);
  const InvariantWeight weight = invariant_weight(potential, grid);
  const DiffMatrices dv = sinc_diff_matrices((grid.nv() - 1) / 2, grid.hv());
  Vector y(grid.size());
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.nv(); ++j) {
      const double x = grid.x()(i);
      const double v = grid.v()(j);
      y(grid.index(i, j)) = std::exp(-0.5 * (x * x + v * v));
    }
  }
  const double form = weighted_inner(a * y, y, weight.sqrt_weight);
  const double grad = weighted_norms(y, weight.sqrt_weight, dv.first, grid).velocity;
  const double scale = potential.gamma / potential.beta * grad * grad;
  return {std::abs(form + scale), scale};
}

std::vector<CheckResult> run_acceptance(const RunConfig& config, const std::vector<int>& only,
                                        const CheckCallback& on_result) {
  SharedProblem shared(config);
  std::vector<CheckResult> results;
  for (const CheckSpec& spec : kChecks) {
    if (!only.empty() && std::find(only.begin(), only.end(), spec.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      switch (spec.id) {
        case 1: o = check_diff_matrices(config); break;
        case 2: o = check_kernel(config); break;
        case 3: o = check_kramers(); break;
        case 4: o = check_dissipativity(config); break;
        case 5: o = check_lyapunov(config.seed); break;
        case 6: o = check_small_are(config.seed); break;
        case 7: o = check_hautus(shared); break;
        case 8: o = check_riccati(shared, config.delta); break;
        case 9: o = check_decay(shared); break;
        case 10: o = check_rotated(shared); break;
        case 11: o = check_determinism(shared, config); break;
        default: break;
      }
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    CheckResult r;
    r.id = spec.id;
    r.name = spec.name;
    r.seconds = elapsed_since(t0);
    r.budget = spec.budget;
    r.passed = o.passed && r.seconds < spec.budget;
    r.measured = o.measured;
    if (o.passed && !r.passed) r.measured += " (over time budget)";
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace hypoctl
