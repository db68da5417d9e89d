#include "deflate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace hypoctl {

InvariantDirection find_invariant_direction(const MatrixRef& a_tilde,
                                            const VectorRef& analytic,
                                            double separation_ratio,
                                            double alignment_tol) {
  if (a_tilde.rows() != analytic.size()) {
    fail(ErrorCode::kInvalidArgument, "find_invariant_direction: dimension mismatch");
  }
  const SpectrumResult spec = eig(a_tilde);
  const Eigen::Index n = spec.values.size();
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < n; ++j) {
    if (std::abs(spec.values(j)) < std::abs(spec.values(best))) best = j;
  }
  double next = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != best) next = std::min(next, std::abs(spec.values(j)));
  }

  InvariantDirection out;
  out.eigenvalue = spec.values(best);
  out.next_modulus = next;
  if (!(next > separation_ratio * std::abs(out.eigenvalue)) ||
      std::abs(out.eigenvalue.imag()) > 0.0) {
    std::ostringstream os;
    os << "find_invariant_direction: the null mode is not separated (|lambda_0| = "
       << std::abs(out.eigenvalue) << ", next |lambda| = " << next
       << "); the grid is too coarse or the window too small";
    fail(ErrorCode::kNumeric, os.str());
  }

  Vector s = spec.right.col(best).real();
  s.normalize();
  if (s.sum() < 0.0) s = -s;
  out.vector = s;
  out.alignment = std::abs(s.dot(analytic)) / analytic.norm();
  const double fro = a_tilde.norm();
  out.right_residual = (a_tilde * s).norm() / fro;
  out.left_residual = (a_tilde.transpose() * s).norm() / fro;
  if (out.alignment < 1.0 - alignment_tol) {
    std::ostringstream os;
    os << "find_invariant_direction: null vector misaligned with sqrt(mu) ("
       << "alignment " << out.alignment << "); refine the grid";
    fail(ErrorCode::kNumeric, os.str());
  }
  return out;
}

Reflector::Reflector(const VectorRef& s) {
  Vector w = s / s.norm();
  w(0) -= 1.0;
  const double norm = w.norm();
  // s == e_1: H = I.
  w_ = norm > 0.0 ? Vector(w / norm) : Vector::Zero(s.size());
}

void Reflector::apply(Eigen::Ref<Vector> x) const {
  if (w_.size() == 0) return;
  x -= (2.0 * w_.dot(x)) * w_;
}

void Reflector::apply_two_sided(Matrix& m) const {
  const Vector left = m.transpose() * w_;  // m^T w
  m.noalias() -= 2.0 * w_ * left.transpose();
  const Vector right = m * w_;
  m.noalias() -= 2.0 * right * w_.transpose();
}

Vector DeflatedSystem::lift(const VectorRef& zeta) const {
  Vector z(zeta.size() + 1);
  z(0) = 0.0;
  z.tail(zeta.size()) = zeta;
  reflector.apply(z);
  return z;
}

Vector DeflatedSystem::restrict(const VectorRef& z) const {
  Vector hz = z;
  reflector.apply(hz);
  return hz.tail(hz.size() - 1);
}

Matrix DeflatedSystem::control_operator(const MatrixRef& n_tilde) const {
  Matrix m = n_tilde;
  reflector.apply_two_sided(m);
  return m.bottomRightCorner(m.rows() - 1, m.cols() - 1);
}

DeflatedSystem deflate(const MatrixRef& a_tilde, const MatrixRef& b_tilde,
                       const VectorRef& s_hat) {
  const Eigen::Index n = a_tilde.rows();
  if (a_tilde.cols() != n || b_tilde.rows() != n || s_hat.size() != n || n < 2) {
    fail(ErrorCode::kInvalidArgument, "deflate: dimension mismatch");
  }
  if (std::abs(s_hat.norm() - 1.0) > 1e-12) {
    fail(ErrorCode::kInvalidArgument, "deflate: invariant direction must be unit");
  }
  DeflatedSystem d;
  d.s_hat = s_hat;
  d.reflector = Reflector(s_hat);
  d.a_frobenius = a_tilde.norm();

  Matrix m = a_tilde;
  d.reflector.apply_two_sided(m);
  d.corner = m(0, 0);
  d.column_defect = m.col(0).tail(n - 1).norm();
  d.row_defect = m.row(0).tail(n - 1).norm();
  d.a_hat = m.bottomRightCorner(n - 1, n - 1);

  Matrix hb = b_tilde;
  for (Eigen::Index i = 0; i < hb.cols(); ++i) d.reflector.apply(hb.col(i));
  d.b_leading = hb.row(0).transpose();
  d.b_hat = hb.bottomRows(n - 1);
  return d;
}

double mass(const VectorRef& y, const VectorRef& sqrt_weight) {
  if (y.size() != sqrt_weight.size()) {
    fail(ErrorCode::kInvalidArgument, "mass: dimension mismatch");
  }
  return (sqrt_weight.array().square() * y.array()).sum();
}

}  // namespace hypoctl
