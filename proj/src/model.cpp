#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "discretize.hpp"
#include "error.hpp"

namespace hypoctl {

ValueSlope triple_well(double x) {
  const double x2 = x * x;
  const double value = (((0.5 * x2 - 15.0) * x2 + 119.0) * x2 + 28.0 * x + 50.0) / 200.0;
  const double slope = (((3.0 * x2 - 60.0) * x2 + 238.0) * x + 28.0) / 200.0;
  return {value, slope};
}

ValueSlope logistic_shape(int index, double x) {
  if (index < 1 || index > 4) {
    fail(ErrorCode::kInvalidArgument,
         "logistic_shape: index must be in 1..4, got " + std::to_string(index));
  }
  const double z = x + (2.0 * index - 5.0);
  // e = exp(-|z|) never overflows; both branches reuse it.
  const double e = std::exp(-std::abs(z));
  const double value = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  const double slope = e / ((1.0 + e) * (1.0 + e));
  return {value, slope};
}

ConfinementPotential ConfinementPotential::make_triple_well() {
  return ConfinementPotential{};
}

ConfinementPotential ConfinementPotential::make_quadratic(double omega) {
  ConfinementPotential p;
  p.kind = Kind::kQuadratic;
  p.omega = omega;
  return p;
}

ConfinementPotential ConfinementPotential::make_polynomial(
    std::vector<double> coefficients) {
  ConfinementPotential p;
  p.kind = Kind::kPolynomial;
  p.coefficients = std::move(coefficients);
  return p;
}

ValueSlope ConfinementPotential::evaluate(double x) const {
  switch (kind) {
    case Kind::kTripleWell:
      return triple_well(x);
    case Kind::kQuadratic:
      return {0.5 * omega * omega * x * x, omega * omega * x};
    case Kind::kPolynomial: {
      double value = 0.0;
      double slope = 0.0;
      for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
        slope = slope * x + value;
        value = value * x + *it;
      }
      return {value, slope};
    }
  }
  return {};
}

void ConfinementPotential::validate() const {
  if (!(gamma > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::kConfig, "potential: gamma and beta must be positive");
  }
  if (kind == Kind::kQuadratic && !(omega > 0.0)) {
    fail(ErrorCode::kConfig, "potential: omega must be positive");
  }
  if (kind == Kind::kPolynomial) {
    if (coefficients.empty()) {
      fail(ErrorCode::kConfig, "potential: empty polynomial coefficient list");
    }
    for (double c : coefficients) {
      if (!std::isfinite(c)) {
        fail(ErrorCode::kConfig, "potential: non-finite coefficient");
      }
    }
    std::size_t degree = coefficients.size() - 1;
    while (degree > 0 && coefficients[degree] == 0.0) --degree;
    if (degree == 0 || degree % 2 != 0 || !(coefficients[degree] > 0.0)) {
      fail(ErrorCode::kConfig,
           "potential: polynomial must have even degree >= 2 and a positive "
           "leading coefficient (confinement)");
    }
  }
}

std::string ConfinementPotential::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::kTripleWell:
      os << "triple_well";
      break;
    case Kind::kQuadratic:
      os << "quadratic(" << omega << ")";
      break;
    case Kind::kPolynomial:
      os << "polynomial(";
      for (std::size_t i = 0; i < coefficients.size(); ++i) {
        os << (i ? "," : "") << coefficients[i];
      }
      os << ")";
      break;
  }
  os << ";gamma=" << gamma << ";beta=" << beta;
  return os.str();
}

ControlShape ControlShape::logistic(int index) {
  ControlShape s;
  s.kind = Kind::kLogistic;
  s.logistic_index = index;
  return s;
}

ControlShape ControlShape::constant_shape(double c) {
  ControlShape s;
  s.kind = Kind::kConstant;
  s.constant = c;
  return s;
}

ControlShape ControlShape::tabulated(std::vector<double> nodes,
                                     std::vector<double> values,
                                     std::vector<double> slopes) {
  ControlShape s;
  s.kind = Kind::kTabulated;
  s.nodes = std::move(nodes);
  s.values = std::move(values);
  s.slopes = std::move(slopes);
  return s;
}

ValueSlope ControlShape::evaluate(double x) const {
  switch (kind) {
    case Kind::kLogistic:
      return logistic_shape(logistic_index, x);
    case Kind::kConstant:
      return {constant, 0.0};
    case Kind::kTabulated: {
      if (x <= nodes.front()) return {values.front(), slopes.front()};
      if (x >= nodes.back()) return {values.back(), slopes.back()};
      const auto hi = std::upper_bound(nodes.begin(), nodes.end(), x);
      const std::size_t k = static_cast<std::size_t>(hi - nodes.begin());
      const double t = (x - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
      return {(1.0 - t) * values[k - 1] + t * values[k],
              (1.0 - t) * slopes[k - 1] + t * slopes[k]};
    }
  }
  return {};
}

void ControlShape::validate() const {
  if (kind == Kind::kLogistic && (logistic_index < 1 || logistic_index > 4)) {
    fail(ErrorCode::kConfig, "control shape: logistic index must be in 1..4");
  }
  if (kind == Kind::kConstant && !std::isfinite(constant)) {
    fail(ErrorCode::kConfig, "control shape: constant must be finite");
  }
  if (kind == Kind::kTabulated) {
    if (nodes.size() < 2 || nodes.size() != values.size() ||
        nodes.size() != slopes.size()) {
      fail(ErrorCode::kConfig,
           "control shape: table needs >= 2 rows of (x, alpha, alpha')");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!std::isfinite(nodes[i]) || !std::isfinite(values[i]) ||
          !std::isfinite(slopes[i])) {
        fail(ErrorCode::kConfig, "control shape: non-finite table entry");
      }
      if (i > 0 && !(nodes[i] > nodes[i - 1])) {
        fail(ErrorCode::kConfig,
             "control shape: table nodes must be strictly increasing");
      }
    }
  }
}

std::string ControlShape::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::kLogistic:
      os << "logistic:" << logistic_index;
      break;
    case Kind::kConstant:
      os << "constant:" << constant;
      break;
    case Kind::kTabulated:
      os << "tabulated[" << nodes.size() << "]";
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        os << ";" << nodes[i] << "," << values[i] << "," << slopes[i];
      }
      break;
  }
  return os.str();
}

InvariantWeight invariant_weight(const ConfinementPotential& potential,
                                 const PhaseGrid& grid) {
  InvariantWeight w;
  w.cell_area = grid.hx() * grid.hv();
  Vector boltzmann(grid.size());
  for (int i = 0; i < grid.nx(); ++i) {
    const double g = potential.evaluate(grid.x()(i)).value;
    for (int j = 0; j < grid.nv(); ++j) {
      const double v = grid.v()(j);
      boltzmann(grid.index(i, j)) = std::exp(-potential.beta * (0.5 * v * v + g));
    }
  }
  const double total = boltzmann.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    fail(ErrorCode::kNumeric,
         "invariant_weight: exp(-H) underflows (or overflows) on every grid "
         "node; the truncated domain does not cover the bulk of the measure");
  }
  w.normalization = w.cell_area * total;
  w.density = boltzmann / w.normalization;
  w.sqrt_weight = (w.cell_area * w.density).cwiseSqrt();
  return w;
}

ValueSlope shape_bounds(const ControlShape& shape, const PhaseGrid& grid) {
  ValueSlope bound;
  for (int i = 0; i < grid.nx(); ++i) {
    const ValueSlope a = shape.evaluate(grid.x()(i));
    if (!std::isfinite(a.value) || !std::isfinite(a.slope)) {
      fail(ErrorCode::kNumeric, "control shape is unbounded on the grid");
    }
    bound.value = std::max(bound.value, std::abs(a.value));
    bound.slope = std::max(bound.slope, std::abs(a.slope));
  }
  return bound;
}

}  // namespace hypoctl
