#include "pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace hypoctl {

namespace {

using nlohmann::json;

json complex_pair(const std::complex<double>& z) { return {z.real(), z.imag()}; }

Matrix spectrum_matrix(const ComplexVector& values) {
  Matrix m(values.size(), 2);
  m.col(0) = values.real();
  m.col(1) = values.imag();
  return m;
}

ComplexVector spectrum_from(const Matrix& m) {
  ComplexVector v(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v(i) = {m(i, 0), m(i, 1)};
  return v;
}

std::string spectrum_table(const ComplexVector& values) {
  std::string out = "index,re,im\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_csv_double(values(i).real()) + "," +
           format_csv_double(values(i).imag()) + "\n";
  }
  return out;
}

}  // namespace

std::string format_csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Container StoredGain::to_container() const {
  Container c;
  c.metadata = metadata;
  c.metadata["kind"] = "riccati";
  c.metadata["residual"] = format_double(residual);
  c.metadata["init_dimension"] = std::to_string(init_dimension);
  c.add("pi", pi);
  c.add("gain", gain);
  c.add("s_hat", s_hat);
  c.add("closed_loop", spectrum_matrix(closed_loop));
  Matrix h(static_cast<Eigen::Index>(history.size()), 4);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    h(r, 0) = history[i].k;
    h(r, 1) = history[i].update_norm;
    h(r, 2) = history[i].residual;
    h(r, 3) = history[i].abscissa;
  }
  c.add("history", h);
  return c;
}

StoredGain StoredGain::from_container(const Container& c) {
  const auto kind = c.metadata.find("kind");
  if (kind == c.metadata.end() || kind->second != "riccati") {
    fail(ErrorCode::kIo, "container does not hold a Riccati solution");
  }
  StoredGain g;
  g.metadata = c.metadata;
  g.metadata.erase("kind");
  g.metadata.erase("residual");
  g.metadata.erase("init_dimension");
  try {
    g.residual = std::stod(c.metadata.at("residual"));
    g.init_dimension = std::stoi(c.metadata.at("init_dimension"));
  } catch (const std::exception&) {
    fail(ErrorCode::kIo, "Riccati container has corrupt scalar metadata");
  }
  g.pi = c.array("pi");
  g.gain = c.array("gain");
  g.s_hat = c.array("s_hat");
  g.closed_loop = spectrum_from(c.array("closed_loop"));
  const Matrix& h = c.array("history");
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    g.history.push_back({static_cast<int>(h(r, 0)), h(r, 1), h(r, 2), h(r, 3)});
  }
  return g;
}

std::string StoredGain::history_csv() const {
  std::string out = "k,update_norm,residual,abscissa\n";
  for (const RiccatiIterate& it : history) {
    out += std::to_string(it.k) + "," + format_csv_double(it.update_norm) + "," +
           format_csv_double(it.residual) + "," + format_csv_double(it.abscissa) + "\n";
  }
  return out;
}

std::string StoredGain::closed_loop_csv() const { return spectrum_table(closed_loop); }

std::string StoredGain::summary_json() const {
  json j;
  j["iterations"] = history.size();
  j["final_update_norm"] = history.empty() ? 0.0 : history.back().update_norm;
  j["residual"] = residual;
  j["init_dimension"] = init_dimension;
  const double abscissa = spectral_abscissa(closed_loop);
  j["closed_loop_abscissa"] = abscissa;
  const double delta = std::stod(metadata.at("riccati.delta"));
  j["shifted_closed_loop_abscissa"] = abscissa + delta;
  j["delta"] = delta;
  j["cost_beta"] = std::stod(metadata.at("riccati.cost_beta"));
  j["gain_norm"] = gain.norm();
  j["pi_norm"] = pi.norm();
  return j.dump(2) + "\n";
}

Problem::Problem(RunConfig config, const Vector* s_hat)
    : config_(std::move(config)), grid_(config_.grid()) {
  config_.validate();
  bundle_ = assemble_bundle(config_.potential, config_.shapes, grid_);
  if (s_hat == nullptr) {
    direction_ = find_invariant_direction(bundle_.symmetrized, bundle_.invariant_direction);
  } else {
    if (s_hat->size() != grid_.size() || std::abs(s_hat->norm() - 1.0) > 1e-12) {
      fail(ErrorCode::kMismatch, "stored invariant direction does not fit this grid");
    }
    const Matrix& a = bundle_.symmetrized;
    direction_.vector = *s_hat;
    direction_.eigenvalue = s_hat->dot(a * *s_hat);
    direction_.alignment = std::abs(s_hat->dot(bundle_.invariant_direction));
    const double fro = a.norm();
    direction_.right_residual = (a * *s_hat).norm() / fro;
    direction_.left_residual = (a.transpose() * *s_hat).norm() / fro;
  }
  deflated_ = deflate(bundle_.symmetrized, bundle_.control_vectors(), direction_.vector);
  operators_ = std::make_unique<KroneckerOperators>(config_.potential, grid_,
                                                    bundle_.controls);
}

const SpectrumResult& Problem::spectrum() const {
  if (!spectrum_) spectrum_ = eig(deflated_.a_hat, {.right = false, .left = true});
  return *spectrum_;
}

StabilizabilityReport Problem::analyze() const {
  HautusOptions opts;
  opts.hautus_tol = config_.hautus_tol;
  opts.gap_modes = config_.gap_modes;
  return hautus_check(deflated_.b_hat, deflated_.a_hat, spectrum(), config_.delta, opts);
}

std::string Problem::analysis_json(const StabilizabilityReport& report) const {
  json j = json::parse(report.to_json());
  j["dimension"] = grid_.size();
  // Decay rate of the slowest mode on the mass-zero subspace.
  j["spectral_gap"] = report.eigenvalues.size() ? -report.eigenvalues(0).real() : 0.0;
  j["inputs"] = deflated_.b_hat.cols();
  j["invariant_direction"] = {
      {"eigenvalue", complex_pair(direction_.eigenvalue)},
      {"next_modulus", direction_.next_modulus},
      {"alignment", direction_.alignment},
      {"right_residual", direction_.right_residual},
      {"left_residual", direction_.left_residual}};
  std::vector<double> lead(deflated_.b_leading.data(),
                           deflated_.b_leading.data() + deflated_.b_leading.size());
  j["deflation"] = {{"column_defect", deflated_.column_defect / deflated_.a_frobenius},
                    {"row_defect", deflated_.row_defect / deflated_.a_frobenius},
                    {"frobenius_norm", deflated_.a_frobenius},
                    {"control_leading", lead}};
  j["shapes"] = config_.shapes_spec;
  return j.dump(2) + "\n";
}

std::string Problem::spectrum_csv(const StabilizabilityReport& report) const {
  return spectrum_table(report.eigenvalues);
}

Container Problem::operators_container() const {
  Container c;
  c.metadata = config_.problem_metadata();
  c.metadata.erase("riccati.delta");
  c.metadata.erase("riccati.cost_beta");
  c.metadata["kind"] = "operators";
  c.add("a_tilde", bundle_.symmetrized);
  c.add("b_tilde", bundle_.control_vectors());
  c.add("sqrt_weight", bundle_.sqrt_weight);
  c.add("s_hat", direction_.vector);
  c.add("x", grid_.x());
  c.add("v", grid_.v());
  return c;
}

StoredGain Problem::solve_riccati(const IterateCallback& on_iterate) const {
  const StabilizabilityReport report = analyze();
  if (!report.passed) {
    std::ostringstream os;
    os << "Hautus test fails for delta = " << config_.delta << ":";
    for (const HautusMode& m : report.modes) {
      if (!m.passed) os << " mode " << m.eigenvalue << " (max " << m.max_magnitude << ")";
    }
    fail(ErrorCode::kNotStabilizable, os.str());
  }
  RiccatiOptions opts;
  opts.max_iter = config_.max_iter;
  opts.step_tol = config_.step_tol;
  opts.residual_tol = config_.residual_tol;
  const RiccatiSolution sol = solve_shifted_riccati(
      deflated_.a_hat, deflated_.b_hat, config_.delta, config_.cost_beta, opts, on_iterate);

  StoredGain g;
  g.metadata = config_.problem_metadata();
  g.pi = sol.pi;
  g.gain = sol.gain;
  g.s_hat = direction_.vector;
  g.closed_loop = sol.closed_loop.array() - config_.delta;
  g.history = sol.history;
  g.residual = sol.residual;
  g.init_dimension = sol.init_dimension;
  return g;
}

void Problem::check_gain(const StoredGain& gain) const {
  const auto diff = metadata_diff(gain.metadata, config_.problem_metadata());
  if (!diff.empty()) {
    std::string msg = "stored gain does not match the configuration:";
    for (const std::string& d : diff) msg += "\n  " + d;
    fail(ErrorCode::kMismatch, msg);
  }
  if (gain.gain.cols() != deflated_.dimension() ||
      gain.gain.rows() != deflated_.b_hat.cols()) {
    fail(ErrorCode::kMismatch, "stored gain has the wrong shape for this problem");
  }
  if ((gain.s_hat - direction_.vector).norm() > 1e-12) {
    fail(ErrorCode::kMismatch,
         "stored gain was computed in a different deflation basis");
  }
}

InitialState Problem::initial_state() const { return initial_state(config_.initial); }

InitialState Problem::initial_state(const InitialParams& params) const {
  InitialParams p = params;
  if (p.kind == InitialKind::kCustom && p.custom.size() == 0) {
    p.custom = read_grid_values(config_.initial_file);
  }
  return make_initial(p, grid_, bundle_.weight, deflated_);
}

SimulationConfig Problem::simulation_config() const {
  SimulationConfig sc;
  sc.horizon = config_.horizon;
  sc.samples = config_.samples;
  sc.snapshot_times = config_.snapshot_times;
  sc.integrator = config_.integrator;
  return sc;
}

Trajectory Problem::simulate(const Matrix& gain, InitialState* initial) const {
  return simulate(gain, config_.initial, simulation_config(), initial);
}

Trajectory Problem::simulate(const Matrix& gain, const InitialParams& params,
                             const SimulationConfig& sim, InitialState* initial) const {
  const ClosedLoopModel model(deflated_, *operators_, bundle_.sqrt_weight, gain);
  const InitialState init = initial_state(params);
  if (initial != nullptr) *initial = init;
  return hypoctl::simulate(model, init, sim);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,norm_zeta";
  for (Eigen::Index i = 0; i < traj.controls.cols(); ++i) out += ",u_" + std::to_string(i + 1);
  out += ",mass\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out += format_csv_double(traj.times[k]) + "," + format_csv_double(traj.norms[k]);
    for (Eigen::Index i = 0; i < traj.controls.cols(); ++i) {
      out += "," + format_csv_double(traj.controls(static_cast<Eigen::Index>(k), i));
    }
    out += "," + format_csv_double(traj.mass[k]) + "\n";
  }
  return out;
}

std::string trajectory_summary_json(const Trajectory& traj, bool controlled,
                                    const RunConfig& config) {
  json j;
  j["controlled"] = controlled;
  j["initial_kind"] = config.entries().at("initial.kind");
  j["horizon"] = config.horizon;
  j["samples"] = traj.times.size();
  const double n0 = traj.norms.front();
  const double nt = traj.norms.back();
  j["norm_initial"] = n0;
  j["norm_terminal"] = nt;
  j["terminal_ratio"] = n0 > 0.0 ? json(nt / n0) : json(nullptr);
  try {
    const DecayFit fit = decay_fit(traj.times, traj.norms);
    j["fit"] = {{"window", {0.5 * (traj.times.front() + traj.times.back()), traj.times.back()}},
                {"slope", fit.slope},
                {"intercept", fit.intercept},
                {"residual", fit.residual},
                {"points", fit.points},
                {"underflow", fit.underflow}};
  } catch (const Error&) {
    j["fit"] = nullptr;
  }
  double drift = 0.0;
  for (double m : traj.mass) drift = std::max(drift, std::abs(m - traj.mass.front()));
  j["mass"] = {{"initial", traj.mass.front()}, {"max_drift", drift}};
  j["max_abs_control"] = traj.controls.size() ? traj.controls.cwiseAbs().maxCoeff() : 0.0;
  j["integrator"] = {{"rtol", config.integrator.rtol},
                     {"atol", config.integrator.atol},
                     {"steps", traj.stats.steps},
                     {"rejected", traj.stats.rejected},
                     {"evaluations", traj.stats.evaluations},
                     {"error_estimate", traj.stats.error_estimate}};
  return j.dump(2) + "\n";
}

Container snapshots_container(const Trajectory& traj, const PhaseGrid& grid,
                              const std::map<std::string, std::string>& metadata) {
  Container c;
  c.metadata = metadata;
  c.metadata["kind"] = "snapshots";
  std::string times;
  for (std::size_t k = 0; k < traj.snapshot_times.size(); ++k) {
    if (k) times += ",";
    times += format_double(traj.snapshot_times[k]);
    // Row i holds x_i, column j holds v_j.
    const Vector& y = traj.snapshots[k];
    Matrix values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>(y.data(), grid.nx(),
                                                                     grid.nv());
    c.add("y_t=" + format_double(traj.snapshot_times[k]), std::move(values));
  }
  c.metadata["snapshot_times"] = times;
  c.add("x", grid.x());
  c.add("v", grid.v());
  return c;
}

}  // namespace hypoctl
