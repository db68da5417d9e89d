#pragma once

// Confinement potentials, control shapes and the Gibbs weight they induce.

#include <string>
#include <vector>

#include "matkernel.hpp"

namespace hypoctl {

class PhaseGrid;

/// Function value together with its first derivative.
struct ValueSlope {
  double value = 0.0;
  double slope = 0.0;
};

/// G(x) = (((x^2/2 - 15) x^2 + 119) x^2 + 28 x + 50) / 200.
ValueSlope triple_well(double x);

/// Logistic shape alpha_i(x) = 1 / (exp(-(x + 2i - 5)) + 1), i in 1..4.
ValueSlope logistic_shape(int index, double x);

struct ConfinementPotential {
  enum class Kind { kTripleWell, kQuadratic, kPolynomial };

  Kind kind = Kind::kTripleWell;
  /// Ascending coefficients c_0 + c_1 x + ... (polynomial kind only).
  std::vector<double> coefficients;
  /// G(x) = omega^2 x^2 / 2 (quadratic kind only).
  double omega = 1.0;
  /// Friction and inverse temperature of the Langevin dynamics.
  double gamma = 1.0;
  double beta = 1.0;

  static ConfinementPotential make_triple_well();
  static ConfinementPotential make_quadratic(double omega = 1.0);
  static ConfinementPotential make_polynomial(std::vector<double> coefficients);

  ValueSlope evaluate(double x) const;
  /// Throws on non-confining polynomials or non-positive gamma/beta.
  void validate() const;
  std::string describe() const;
};

struct ControlShape {
  enum class Kind { kLogistic, kConstant, kTabulated };

  Kind kind = Kind::kLogistic;
  int logistic_index = 1;
  double constant = 0.0;
  /// Tabulated nodes; alpha and alpha' are interpolated linearly and held
  /// constant outside the table.
  std::vector<double> nodes;
  std::vector<double> values;
  std::vector<double> slopes;

  static ControlShape logistic(int index);
  static ControlShape constant_shape(double c);
  static ControlShape tabulated(std::vector<double> nodes,
                                std::vector<double> values,
                                std::vector<double> slopes);

  ValueSlope evaluate(double x) const;
  void validate() const;
  std::string describe() const;
};

/// Normalized Gibbs density mu = exp(-beta H) / Z on the grid, H = v^2/2 + G.
struct InvariantWeight {
  /// mu_ij in x-major order; sum(mu) * hx * hv == 1.
  Vector density;
  /// Z = hx hv sum exp(-beta H).
  double normalization = 0.0;
  double cell_area = 0.0;
  /// sqrt(hx hv mu_ij): maps grid values into the symmetrized coordinates.
  Vector sqrt_weight;
};

InvariantWeight invariant_weight(const ConfinementPotential& potential,
                                 const PhaseGrid& grid);

/// Largest |alpha| and |alpha'| over the x nodes; throws if not finite.
ValueSlope shape_bounds(const ControlShape& shape, const PhaseGrid& grid);

}  // namespace hypoctl
