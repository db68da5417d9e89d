#pragma once

// Sinc collocation of the kinetic Fokker-Planck generator on a tensor grid.
//
// States are stored x-major: the value at (x_i, v_j) sits at i * nv + j, so an
// operator acting on the x-index is kron(P, I) and on the v-index kron(I, Q).

#include <vector>

#include "matkernel.hpp"
#include "model.hpp"

namespace hypoctl {

struct AxisSpec {
  double lower = -5.0;
  double upper = 5.0;
  /// Odd number of collocation points, 2N + 1.
  int points = 41;
};

class PhaseGrid {
 public:
  PhaseGrid(AxisSpec x, AxisSpec v);

  const AxisSpec& x_axis() const { return x_spec_; }
  const AxisSpec& v_axis() const { return v_spec_; }
  int nx() const { return x_spec_.points; }
  int nv() const { return v_spec_.points; }
  Eigen::Index size() const { return Eigen::Index{nx()} * nv(); }
  double hx() const { return hx_; }
  double hv() const { return hv_; }
  const Vector& x() const { return x_; }
  const Vector& v() const { return v_; }
  Eigen::Index index(int ix, int iv) const {
    return Eigen::Index{ix} * nv() + iv;
  }

 private:
  AxisSpec x_spec_;
  AxisSpec v_spec_;
  double hx_;
  double hv_;
  Vector x_;
  Vector v_;
};

struct DiffMatrices {
  Matrix first;
  Matrix second;
};

/// Sinc differentiation matrices on 2N+1 nodes with spacing h. `first` is
/// exactly skew-symmetric and `second` exactly symmetric.
DiffMatrices sinc_diff_matrices(int half_points, double spacing);

/// Copy of `d` whose diagonal is replaced so that every row sums to zero.
Matrix annihilate_constants(const MatrixRef& d);

/// Generator on grid values y:
///   -v d_x y + G' d_v y + gamma (-v d_v y + beta^{-1} d_vv y),
/// assembled with row-sum corrected Sinc matrices so constants are in the
/// kernel.
Matrix assemble_generator_direct(const ConfinementPotential& potential,
                                 const PhaseGrid& grid);

/// Generator conjugated by sqrt(mu):
///   -v d_x + G' d_v + gamma beta^{-1} (d_vv - beta^2 v^2 / 4 + beta / 2),
/// whose skew part (transport) and symmetric part (velocity block) are exact.
Matrix assemble_generator_symmetrized(const ConfinementPotential& potential,
                                      const PhaseGrid& grid);

/// Control operator for one shape alpha, in both coordinate systems.
struct ControlOperator {
  /// alpha'(x_i) on the x nodes.
  Vector shape_slope;
  /// alpha' (d_v - beta v) on grid values.
  Matrix direct;
  /// alpha' (d_v - beta v / 2) in symmetrized coordinates.
  Matrix symmetrized;
  /// symmetrized * sqrt_weight, the image of the constant state.
  Vector vector;
};

ControlOperator assemble_control(const ControlShape& shape,
                                 const ConfinementPotential& potential,
                                 const PhaseGrid& grid,
                                 const InvariantWeight& weight);

/// Matrix-free application of the symmetrized generator and of a weighted
/// sum of symmetrized control operators.
class KroneckerOperators {
 public:
  KroneckerOperators(const ConfinementPotential& potential,
                     const PhaseGrid& grid,
                     const std::vector<ControlOperator>& controls);

  void apply_generator(const VectorRef& z, Eigen::Ref<Vector> out) const;
  /// out = sum_i u_i N_i z.
  void apply_controls(const VectorRef& u, const VectorRef& z,
                      Eigen::Ref<Vector> out) const;
  Eigen::Index size() const { return Eigen::Index{nx_} * nv_; }
  Eigen::Index inputs() const { return slopes_.cols(); }

 private:
  int nx_;
  int nv_;
  Matrix d1x_;
  Matrix d1v_;
  Matrix velocity_block_;  // gamma/beta (D2 - beta^2 v^2/4 + beta/2)
  Matrix control_block_;   // D1 - beta v/2
  Vector v_;
  Vector slope_g_;
  Matrix slopes_;  // nx x m, column i is alpha_i'
};

/// <y, z>_Y = (T y)^T (T z) with T = diag(sqrt_weight).
double weighted_inner(const VectorRef& y, const VectorRef& z,
                      const VectorRef& sqrt_weight);

struct WeightedNorms {
  double value = 0.0;     // ||y||_Y
  double velocity = 0.0;  // ||d_v y||_Y
};

WeightedNorms weighted_norms(const VectorRef& y, const VectorRef& sqrt_weight,
                             const MatrixRef& d1v, const PhaseGrid& grid);

/// Applies kron(I_nx, D) to an x-major state.
Vector apply_velocity_operator(const MatrixRef& d, const VectorRef& y,
                               const PhaseGrid& grid);

/// Everything assembled for one configuration.
struct OperatorBundle {
  Matrix symmetrized;
  Matrix direct;
  std::vector<ControlOperator> controls;
  /// sqrt(hx hv mu), the symmetrizing diagonal T.
  Vector sqrt_weight;
  /// T 1, the unit invariant direction of the continuum problem.
  Vector invariant_direction;
  InvariantWeight weight;
  DiffMatrices dx;
  DiffMatrices dv;

  /// [b_1 ... b_m] in symmetrized coordinates.
  Matrix control_vectors() const;
};

OperatorBundle assemble_bundle(const ConfinementPotential& potential,
                               const std::vector<ControlShape>& shapes,
                               const PhaseGrid& grid);

}  // namespace hypoctl
