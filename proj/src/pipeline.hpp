#pragma once

// One configured problem carried through analysis, Riccati solve and
// simulation, plus the text and container forms of each result.

#include <memory>
#include <optional>
#include <string>

#include "analyze.hpp"
#include "config.hpp"
#include "container.hpp"
#include "deflate.hpp"
#include "discretize.hpp"
#include "riccati.hpp"
#include "simulate.hpp"

namespace hypoctl {

/// Riccati result as persisted: enough to simulate without re-solving.
struct StoredGain {
  std::map<std::string, std::string> metadata;
  Matrix pi;
  Matrix gain;
  Vector s_hat;
  ComplexVector closed_loop;
  std::vector<RiccatiIterate> history;
  double residual = 0.0;
  int init_dimension = 0;

  Container to_container() const;
  static StoredGain from_container(const Container& c);
  std::string history_csv() const;
  std::string closed_loop_csv() const;
  std::string summary_json() const;
};

class Problem {
 public:
  /// Assembles operators and deflates. With `s_hat`, the stored invariant
  /// direction is reused instead of recomputed.
  explicit Problem(RunConfig config, const Vector* s_hat = nullptr);

  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const RunConfig& config() const { return config_; }
  const PhaseGrid& grid() const { return grid_; }
  const OperatorBundle& bundle() const { return bundle_; }
  const InvariantDirection& direction() const { return direction_; }
  const DeflatedSystem& deflated() const { return deflated_; }
  const KroneckerOperators& operators() const { return *operators_; }

  /// Spectrum of A_hat with left eigenvectors, computed once.
  const SpectrumResult& spectrum() const;
  StabilizabilityReport analyze() const;
  std::string analysis_json(const StabilizabilityReport& report) const;
  std::string spectrum_csv(const StabilizabilityReport& report) const;
  Container operators_container() const;

  /// Validates the shift against the spectral gap, requires a passing
  /// Hautus test and solves the shifted Riccati equation.
  StoredGain solve_riccati(const IterateCallback& on_iterate = {}) const;

  /// Throws kMismatch listing every differing key.
  void check_gain(const StoredGain& gain) const;
  InitialState initial_state() const;
  InitialState initial_state(const InitialParams& params) const;
  SimulationConfig simulation_config() const;
  /// Empty gain: uncontrolled run. Uses the configured initial state and
  /// integrator unless given explicitly.
  Trajectory simulate(const Matrix& gain, InitialState* initial = nullptr) const;
  Trajectory simulate(const Matrix& gain, const InitialParams& params,
                      const SimulationConfig& sim, InitialState* initial = nullptr) const;

 private:
  RunConfig config_;
  PhaseGrid grid_;
  OperatorBundle bundle_;
  InvariantDirection direction_;
  DeflatedSystem deflated_;
  std::unique_ptr<KroneckerOperators> operators_;
  mutable std::optional<SpectrumResult> spectrum_;
};

std::string trajectory_csv(const Trajectory& traj);
std::string trajectory_summary_json(const Trajectory& traj, bool controlled,
                                    const RunConfig& config);
Container snapshots_container(const Trajectory& traj, const PhaseGrid& grid,
                              const std::map<std::string, std::string>& metadata);

/// printf("%.17g").
std::string format_csv_double(double v);

}  // namespace hypoctl
