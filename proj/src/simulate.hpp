#pragma once

// Time integration of the deflated bilinear system and decay-rate fitting.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deflate.hpp"
#include "discretize.hpp"
#include "matkernel.hpp"

namespace hypoctl {

struct IntegratorConfig {
  double rtol = 1e-3;
  double atol = 1e-6;
  /// <= 0 selects a tenth of the integration span.
  double max_step = 0.0;
};

struct IntegrationStats {
  long steps = 0;
  long rejected = 0;
  long evaluations = 0;
  /// Sum of the 2-norms of the accepted local error estimates.
  double error_estimate = 0.0;
};

using OdeRhs = std::function<void(double t, const VectorRef& y, Eigen::Ref<Vector> dy)>;
using OdeObserver = std::function<void(double t, const Vector& y)>;

/// Bogacki-Shampine 2(3) with PI step control and cubic Hermite output at
/// `output_times` (increasing, inside [t0, t1]). The observer sees each
/// output time once; t0 receives y0 itself.
IntegrationStats integrate_rk23(const OdeRhs& rhs, const VectorRef& y0,
                                double t0, double t1,
                                const std::vector<double>& output_times,
                                const IntegratorConfig& config,
                                const OdeObserver& observer);

/// u = -K zeta; d zeta/dt = A zeta + sum_i u_i (N_i zeta + b_i). An empty K
/// gives the uncontrolled system.
Vector closed_loop_rhs(const VectorRef& zeta, const MatrixRef& a_hat,
                       const std::vector<Matrix>& n_hat, const MatrixRef& b_hat,
                       const MatrixRef& gain);

/// The same right-hand side evaluated without forming A_hat or N_hat: the
/// state is lifted, pushed through the Kronecker-structured symmetrized
/// operators and restricted again.
class ClosedLoopModel {
 public:
  ClosedLoopModel(const DeflatedSystem& deflated,
                  const KroneckerOperators& operators, Vector sqrt_weight,
                  Matrix gain);

  Eigen::Index dimension() const { return deflated_->dimension(); }
  Eigen::Index inputs() const { return deflated_->b_hat.cols(); }
  bool controlled() const { return gain_.size() > 0; }
  const Matrix& gain() const { return gain_; }

  Vector controls(const VectorRef& zeta) const;
  void rhs(const VectorRef& zeta, Eigen::Ref<Vector> out) const;
  /// Symmetrized state c s + H [0; zeta].
  Vector full_state(double coefficient, const VectorRef& zeta) const;
  /// Grid values y = T^{-1} z.
  Vector grid_values(double coefficient, const VectorRef& zeta) const;
  /// <y, 1>_Y = sqrt_weight^T z.
  double mass(double coefficient, const VectorRef& zeta) const;

 private:
  const DeflatedSystem* deflated_;
  const KroneckerOperators* operators_;
  Vector sqrt_weight_;
  Matrix gain_;
};

enum class InitialKind { kPerturbed, kRotated, kCustom, kEquilibrium };

struct InitialParams {
  InitialKind kind = InitialKind::kPerturbed;
  double amplitude = 0.5;
  double theta = 0.5;
  /// Grid values for the custom kind, x-major.
  Vector custom;
};

struct InitialState {
  /// Grid values with unit mass.
  Vector y0;
  Vector zeta0;
  /// <s, T y0>, the frozen component along the invariant direction.
  double coefficient = 0.0;
  double mass = 0.0;
};

InitialState make_initial(const InitialParams& params, const PhaseGrid& grid,
                          const InvariantWeight& weight,
                          const DeflatedSystem& deflated);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> norms;
  /// samples x inputs.
  Matrix controls;
  std::vector<double> mass;
  std::vector<double> snapshot_times;
  std::vector<Vector> snapshots;
  IntegrationStats stats;
};

struct SimulationConfig {
  double horizon = 40.0;
  int samples = 401;
  std::vector<double> snapshot_times;
  IntegratorConfig integrator;
};

Trajectory simulate(const ClosedLoopModel& model, const InitialState& initial,
                    const SimulationConfig& config);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// RMS residual of log ||zeta|| about the fitted line.
  double residual = 0.0;
  int points = 0;
  /// Samples at machine zero were dropped from the window.
  bool underflow = false;
};

/// Least-squares slope of log ||zeta(t)|| over [window_start, window_end];
/// a negative window_start selects the second half of the samples' span.
DecayFit decay_fit(const std::vector<double>& times,
                   const std::vector<double>& norms, double window_start = -1.0,
                   double window_end = -1.0);

}  // namespace hypoctl
