#include "oracle.hpp"

#include <cmath>

#include "error.hpp"

namespace hypoctl::oracle {

Matrix lyapunov_kronecker(const MatrixRef& a, const MatrixRef& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    fail(ErrorCode::kInvalidArgument, "lyapunov_kronecker: dimension mismatch");
  }
  const Matrix id = Matrix::Identity(n, n);
  const Matrix at = a.transpose();
  const Matrix k = kron(id, at) + kron(at, id);
  const Vector rhs = -Eigen::Map<const Vector>(Matrix(q).data(), n * n);
  const Vector x = k.fullPivLu().solve(rhs);
  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

std::vector<std::complex<double>> kramers_eigenvalues(double gamma, double omega,
                                                      int max_order) {
  const std::complex<double> root =
      std::sqrt(std::complex<double>(gamma * gamma - 4.0 * omega * omega, 0.0));
  const std::complex<double> mu_plus = 0.5 * (gamma + root);
  const std::complex<double> mu_minus = 0.5 * (gamma - root);
  std::vector<std::complex<double>> out;
  for (int total = 0; total <= max_order; ++total) {
    for (int np = total; np >= 0; --np) {
      out.push_back(-static_cast<double>(np) * mu_plus -
                    static_cast<double>(total - np) * mu_minus);
    }
  }
  return out;
}

double scalar_care(double a, double b, double q, double r) {
  if (b == 0.0) {
    if (!(a < 0.0)) fail(ErrorCode::kNotStabilizable, "scalar_care: b = 0 and a >= 0");
    return -q / (2.0 * a);
  }
  return (a + std::sqrt(a * a + q * b * b / r)) * r / (b * b);
}

double scalar_newton_step(double a, double b, double q, double r, double p) {
  const double closed = a - b * b * p / r;
  return (q + p * p * b * b / r) / (-2.0 * closed);
}

}  // namespace hypoctl::oracle
