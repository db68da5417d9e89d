#include "discretize.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace hypoctl {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_axis(const AxisSpec& a, const char* name) {
  if (!std::isfinite(a.lower) || !std::isfinite(a.upper) || !(a.lower < a.upper)) {
    fail(ErrorCode::kConfig, std::string("grid: axis ") + name +
                                 " needs finite bounds with lower < upper");
  }
  if (a.points < 3 || a.points % 2 == 0) {
    fail(ErrorCode::kConfig, std::string("grid: axis ") + name +
                                 " needs an odd number of points >= 3, got " +
                                 std::to_string(a.points));
  }
}

Vector axis_nodes(const AxisSpec& a, double h) {
  const int half = (a.points - 1) / 2;
  const double center = 0.5 * (a.lower + a.upper);
  Vector nodes(a.points);
  for (int j = -half; j <= half; ++j) nodes(j + half) = center + j * h;
  return nodes;
}

Vector potential_slopes(const ConfinementPotential& potential, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g(i) = potential.evaluate(x(i)).slope;
  return g;
}

Vector shape_slopes(const ControlShape& shape, const Vector& x) {
  Vector a(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) a(i) = shape.evaluate(x(i)).slope;
  return a;
}

// gamma/beta (D2 - beta^2 v^2/4 + beta/2): the self-adjoint velocity block.
Matrix velocity_block(const ConfinementPotential& p, const Matrix& d2v,
                      const Vector& v) {
  Matrix block = d2v;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    block(j, j) += -0.25 * p.beta * p.beta * v(j) * v(j) + 0.5 * p.beta;
  }
  return (p.gamma / p.beta) * block;
}

Matrix control_block(const ConfinementPotential& p, const Matrix& d1v,
                     const Vector& v) {
  Matrix block = d1v;
  block.diagonal() -= 0.5 * p.beta * v;
  return block;
}

}  // namespace

PhaseGrid::PhaseGrid(AxisSpec x, AxisSpec v) : x_spec_(x), v_spec_(v) {
  check_axis(x_spec_, "x");
  check_axis(v_spec_, "v");
  hx_ = (x_spec_.upper - x_spec_.lower) / (x_spec_.points - 1);
  hv_ = (v_spec_.upper - v_spec_.lower) / (v_spec_.points - 1);
  x_ = axis_nodes(x_spec_, hx_);
  v_ = axis_nodes(v_spec_, hv_);
}

DiffMatrices sinc_diff_matrices(int half_points, double spacing) {
  if (half_points < 1 || !(spacing > 0.0)) {
    fail(ErrorCode::kInvalidArgument,
         "sinc_diff_matrices: need N >= 1 and h > 0");
  }
  const int n = 2 * half_points + 1;
  DiffMatrices d{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  const double h2 = spacing * spacing;
  for (int j = 0; j < n; ++j) {
    d.second(j, j) = -std::numbers::pi * std::numbers::pi / (3.0 * h2);
    for (int k = 0; k < j; ++k) {
      const int m = j - k;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double first = sign / (spacing * m);
      const double second = -2.0 * sign / (h2 * m * m);
      d.first(j, k) = first;
      d.first(k, j) = -first;
      d.second(j, k) = second;
      d.second(k, j) = second;
    }
  }
  return d;
}

Matrix annihilate_constants(const MatrixRef& d) {
  Matrix out = d;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out(i, i) = 0.0;
    out(i, i) = -out.row(i).sum();
  }
  return out;
}

Matrix assemble_generator_direct(const ConfinementPotential& potential,
                                 const PhaseGrid& grid) {
  potential.validate();
  const DiffMatrices dx = sinc_diff_matrices((grid.nx() - 1) / 2, grid.hx());
  const DiffMatrices dv = sinc_diff_matrices((grid.nv() - 1) / 2, grid.hv());
  const Matrix e1x = annihilate_constants(dx.first);
  const Matrix e1v = annihilate_constants(dv.first);
  const Matrix e2v = annihilate_constants(dv.second);
  const Vector g = potential_slopes(potential, grid.x());
  const Vector& v = grid.v();

  // Velocity-only part: gamma (-v d_v + beta^{-1} d_vv).
  Matrix vel = potential.gamma / potential.beta * e2v;
  vel.noalias() -= potential.gamma * v.asDiagonal() * e1v;

  const int nx = grid.nx();
  const int nv = grid.nv();
  Matrix a = Matrix::Zero(grid.size(), grid.size());
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nx; ++k) {
      auto block = a.block(Eigen::Index{i} * nv, Eigen::Index{k} * nv, nv, nv);
      if (e1x(i, k) != 0.0) block.diagonal() = -e1x(i, k) * v;
      if (i == k) block += g(i) * e1v + vel;
    }
  }
  return a;
}

Matrix assemble_generator_symmetrized(const ConfinementPotential& potential,
                                      const PhaseGrid& grid) {
  potential.validate();
  const DiffMatrices dx = sinc_diff_matrices((grid.nx() - 1) / 2, grid.hx());
  const DiffMatrices dv = sinc_diff_matrices((grid.nv() - 1) / 2, grid.hv());
  const Vector g = potential_slopes(potential, grid.x());
  const Vector& v = grid.v();
  const Matrix vel = velocity_block(potential, dv.second, v);

  const int nx = grid.nx();
  const int nv = grid.nv();
  Matrix a = Matrix::Zero(grid.size(), grid.size());
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nx; ++k) {
      auto block = a.block(Eigen::Index{i} * nv, Eigen::Index{k} * nv, nv, nv);
      if (i != k) {
        block.diagonal() = -dx.first(i, k) * v;
      } else {
        block = g(i) * dv.first + vel;
      }
    }
  }
  return a;
}

ControlOperator assemble_control(const ControlShape& shape,
                                 const ConfinementPotential& potential,
                                 const PhaseGrid& grid,
                                 const InvariantWeight& weight) {
  shape.validate();
  (void)shape_bounds(shape, grid);
  const DiffMatrices dv = sinc_diff_matrices((grid.nv() - 1) / 2, grid.hv());
  const Vector& v = grid.v();

  Matrix direct_block = annihilate_constants(dv.first);
  direct_block.diagonal() -= potential.beta * v;
  const Matrix sym_block = control_block(potential, dv.first, v);

  ControlOperator op;
  op.shape_slope = shape_slopes(shape, grid.x());
  const Matrix slope = op.shape_slope.asDiagonal();
  op.direct = kron(slope, direct_block);
  op.symmetrized = kron(slope, sym_block);
  op.vector = op.symmetrized * weight.sqrt_weight;
  return op;
}

KroneckerOperators::KroneckerOperators(
    const ConfinementPotential& potential, const PhaseGrid& grid,
    const std::vector<ControlOperator>& controls)
    : nx_(grid.nx()), nv_(grid.nv()) {
  const DiffMatrices dx = sinc_diff_matrices((nx_ - 1) / 2, grid.hx());
  const DiffMatrices dv = sinc_diff_matrices((nv_ - 1) / 2, grid.hv());
  d1x_ = dx.first;
  d1v_ = dv.first;
  v_ = grid.v();
  velocity_block_ = velocity_block(potential, dv.second, v_);
  control_block_ = control_block(potential, dv.first, v_);
  slope_g_ = potential_slopes(potential, grid.x());
  slopes_.resize(nx_, static_cast<Eigen::Index>(controls.size()));
  for (std::size_t i = 0; i < controls.size(); ++i) {
    slopes_.col(static_cast<Eigen::Index>(i)) = controls[i].shape_slope;
  }
}

// With Z(i, j) = z[i nv + j]: kron(P, I) z = P Z and kron(I, Q) z = Z Q^T.
void KroneckerOperators::apply_generator(const VectorRef& z,
                                         Eigen::Ref<Vector> out) const {
  Eigen::Map<const RowMajorMatrix> zm(z.data(), nx_, nv_);
  Eigen::Map<RowMajorMatrix> om(out.data(), nx_, nv_);
  RowMajorMatrix transport(nx_, nv_);
  transport.noalias() = d1x_ * zm;
  RowMajorMatrix dvz(nx_, nv_);
  dvz.noalias() = zm * d1v_.transpose();
  om.noalias() = zm * velocity_block_;  // symmetric
  om -= transport * v_.asDiagonal();
  om += slope_g_.asDiagonal() * dvz;
}

void KroneckerOperators::apply_controls(const VectorRef& u, const VectorRef& z,
                                        Eigen::Ref<Vector> out) const {
  Eigen::Map<const RowMajorMatrix> zm(z.data(), nx_, nv_);
  Eigen::Map<RowMajorMatrix> om(out.data(), nx_, nv_);
  const Vector weight = slopes_ * u;
  om.noalias() = zm * control_block_.transpose();
  om = weight.asDiagonal() * om;
}

double weighted_inner(const VectorRef& y, const VectorRef& z,
                      const VectorRef& sqrt_weight) {
  if (y.size() != z.size() || y.size() != sqrt_weight.size()) {
    fail(ErrorCode::kInvalidArgument, "weighted_inner: dimension mismatch");
  }
  return (sqrt_weight.array().square() * y.array() * z.array()).sum();
}

Vector apply_velocity_operator(const MatrixRef& d, const VectorRef& y,
                               const PhaseGrid& grid) {
  if (y.size() != grid.size() || d.rows() != grid.nv() || d.cols() != grid.nv()) {
    fail(ErrorCode::kInvalidArgument, "apply_velocity_operator: dimension mismatch");
  }
  Vector out(y.size());
  Eigen::Map<const RowMajorMatrix> ym(y.data(), grid.nx(), grid.nv());
  Eigen::Map<RowMajorMatrix> om(out.data(), grid.nx(), grid.nv());
  om.noalias() = ym * d.transpose();
  return out;
}

WeightedNorms weighted_norms(const VectorRef& y, const VectorRef& sqrt_weight,
                             const MatrixRef& d1v, const PhaseGrid& grid) {
  if (y.size() != sqrt_weight.size()) {
    fail(ErrorCode::kInvalidArgument, "weighted_norms: dimension mismatch");
  }
  const Vector dy = apply_velocity_operator(d1v, y, grid);
  return {sqrt_weight.cwiseProduct(y).norm(), sqrt_weight.cwiseProduct(dy).norm()};
}

Matrix OperatorBundle::control_vectors() const {
  Matrix b(sqrt_weight.size(), static_cast<Eigen::Index>(controls.size()));
  for (std::size_t i = 0; i < controls.size(); ++i) {
    b.col(static_cast<Eigen::Index>(i)) = controls[i].vector;
  }
  return b;
}

OperatorBundle assemble_bundle(const ConfinementPotential& potential,
                               const std::vector<ControlShape>& shapes,
                               const PhaseGrid& grid) {
  OperatorBundle b;
  b.weight = invariant_weight(potential, grid);
  b.sqrt_weight = b.weight.sqrt_weight;
  b.invariant_direction = b.sqrt_weight / b.sqrt_weight.norm();
  b.dx = sinc_diff_matrices((grid.nx() - 1) / 2, grid.hx());
  b.dv = sinc_diff_matrices((grid.nv() - 1) / 2, grid.hv());
  b.symmetrized = assemble_generator_symmetrized(potential, grid);
  b.direct = assemble_generator_direct(potential, grid);
  b.controls.reserve(shapes.size());
  for (const ControlShape& s : shapes) {
    b.controls.push_back(assemble_control(s, potential, grid, b.weight));
  }
  return b;
}

}  // namespace hypoctl
