#pragma once

// Acceptance checks run by `hypoctl verify` and the acceptance test binary.

#include <functional>
#include <string>
#include <vector>

#include "config.hpp"

namespace hypoctl {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  double seconds = 0.0;
  double budget = 0.0;
};

using CheckCallback = std::function<void(const CheckResult&)>;

/// Runs the checks whose ids are in `only` (all when empty) in id order.
/// Checks 2, 4 and 7-11 use the grid, potential and controls of `config`.
std::vector<CheckResult> run_acceptance(const RunConfig& config,
                                        const std::vector<int>& only = {},
                                        const CheckCallback& on_result = {});

/// Number of checks run_acceptance knows about.
int acceptance_count();

/// max |D - sign D^T|: 0 for an exactly symmetric (sign = 1) or skew
/// (sign = -1) matrix.
double symmetry_defect(const MatrixRef& d, int sign);

/// Worst error of D1 on samples of sin(pi x / (4h)) over the nodes with
/// |j| <= N / 2, relative to the amplitude pi / (4h) of the derivative.
double bandlimited_derivative_error(const DiffMatrices& d, int half_points,
                                    double spacing);

struct DissipativityDefect {
  double defect = 0.0;  // |<A y, y>_Y + gamma/beta ||D1_v y||_Y^2|
  double scale = 0.0;   // gamma/beta ||D1_v y||_Y^2
  double relative() const { return defect / scale; }
};

/// Evaluated for y = exp(-(x^2 + v^2) / 2) with the direct generator.
DissipativityDefect dissipativity_defect(const ConfinementPotential& potential,
                                         const PhaseGrid& grid);

}  // namespace hypoctl
