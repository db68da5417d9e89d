#include "riccati.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace hypoctl {

namespace {

void check_dims(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q,
                const MatrixRef& r) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != b.cols() || r.cols() != b.cols()) {
    fail(ErrorCode::kInvalidArgument, "riccati: dimension mismatch");
  }
}

Matrix gain_from(const Eigen::LLT<Matrix>& r_chol, const MatrixRef& b,
                 const MatrixRef& pi) {
  return r_chol.solve(b.transpose() * pi);
}

}  // namespace

double riccati_residual(const MatrixRef& a, const MatrixRef& b,
                        const MatrixRef& q, const MatrixRef& r,
                        const MatrixRef& pi) {
  check_dims(a, b, q, r);
  const Matrix pb = pi * b;
  Matrix res(a.rows(), a.rows());
  res.noalias() = a.transpose() * pi;
  res += res.transpose().eval();
  res += q;
  res.noalias() -= pb * r.llt().solve(pb.transpose());
  return res.norm() / std::max(1.0, pi.norm() * a.norm());
}

InitialGuess stabilizing_init(const MatrixRef& a, const MatrixRef& b,
                              const MatrixRef& r) {
  check_dims(a, b, Matrix::Zero(a.rows(), a.rows()), r);
  const Eigen::Index n = a.rows();
  InitialGuess guess;
  guess.pi = Matrix::Zero(n, n);

  // Left (adjoint) invariant subspace: V^T A = S^T V^T, so feedback through
  // V^T leaves the remaining eigenvalues of A untouched.
  const Matrix at = a.transpose();
  const Matrix v = stable_invariant_subspace(at, 0.0);
  guess.dimension = static_cast<int>(v.cols());
  if (v.cols() > 0) {
    const Matrix a_sub = v.transpose() * a * v;
    const Matrix b_sub = v.transpose() * b;
    const Matrix q_sub = Matrix::Identity(v.cols(), v.cols());
    const Matrix p_sub = care_small(a_sub, b_sub, q_sub, r);
    guess.pi = v * p_sub * v.transpose();
    guess.pi = 0.5 * (guess.pi + guess.pi.transpose()).eval();
  }
  const Eigen::LLT<Matrix> r_chol(r);
  const Matrix closed = a - b * gain_from(r_chol, b, guess.pi);
  guess.abscissa = spectral_abscissa(eigenvalues(closed));
  if (!(guess.abscissa < 0.0)) {
    std::ostringstream os;
    os << "stabilizing_init: closed loop from the " << guess.dimension
       << "-dimensional projected Riccati solution is not stable (abscissa "
       << guess.abscissa
       << "); enlarge the unstable subspace to include the next eigenvalue "
          "cluster";
    fail(ErrorCode::kNotStabilizable, os.str());
  }
  return guess;
}

RiccatiSolution kleinman_newton(const MatrixRef& a, const MatrixRef& b,
                                const MatrixRef& q, const MatrixRef& r,
                                const MatrixRef& pi0,
                                const RiccatiOptions& options,
                                const IterateCallback& on_iterate) {
  check_dims(a, b, q, r);
  if (pi0.rows() != a.rows() || pi0.cols() != a.cols()) {
    fail(ErrorCode::kInvalidArgument, "kleinman_newton: Pi0 dimension mismatch");
  }
  const Eigen::LLT<Matrix> r_chol(r);
  if (r_chol.info() != Eigen::Success) {
    fail(ErrorCode::kInvalidArgument, "kleinman_newton: R not positive definite");
  }

  RiccatiSolution sol;
  Matrix pi = pi0;
  for (int k = 1; k <= options.max_iter; ++k) {
    const Matrix gain = gain_from(r_chol, b, pi);
    const Matrix closed = a - b * gain;
    const SchurForm schur = real_schur(closed);
    const double abscissa = spectral_abscissa(schur.diagonal_eigenvalues());
    if (!(abscissa < 0.0)) {
      std::ostringstream os;
      os << "kleinman_newton: closed loop lost stability at iteration " << k
         << " (abscissa " << abscissa << "); the initial guess is not "
         << "stabilizing";
      fail(ErrorCode::kConvergence, os.str());
    }
    Matrix rhs = q;
    rhs.noalias() += gain.transpose() * r * gain;
    rhs = 0.5 * (rhs + rhs.transpose()).eval();
    Matrix next = lyapunov_solve(schur, rhs);

    RiccatiIterate it;
    it.k = k;
    it.update_norm = (next - pi).norm();
    it.residual = riccati_residual(a, b, q, r, next);
    it.abscissa = abscissa;
    pi = std::move(next);
    sol.history.push_back(it);
    if (on_iterate) on_iterate(it, pi);
    if (it.update_norm < options.step_tol && it.residual <= options.residual_tol) {
      break;
    }
    if (k == options.max_iter) {
      std::ostringstream os;
      os << "kleinman_newton: no convergence in " << options.max_iter
         << " iterations; history (update, residual):";
      for (const RiccatiIterate& h : sol.history) {
        os << " (" << h.update_norm << ", " << h.residual << ")";
      }
      fail(ErrorCode::kConvergence, os.str());
    }
  }

  sol.pi = std::move(pi);
  sol.gain = gain_from(r_chol, b, sol.pi);
  sol.residual = sol.history.empty() ? riccati_residual(a, b, q, r, sol.pi)
                                     : sol.history.back().residual;
  sol.closed_loop = eigenvalues(a - b * sol.gain);
  if (!(spectral_abscissa(sol.closed_loop) < 0.0)) {
    fail(ErrorCode::kConvergence,
         "kleinman_newton: converged solution is not stabilizing");
  }
  return sol;
}

Matrix feedback_gain(const MatrixRef& pi, const MatrixRef& b, double beta) {
  if (!(beta > 0.0)) fail(ErrorCode::kInvalidArgument, "feedback_gain: beta <= 0");
  if (pi.rows() != b.rows()) {
    fail(ErrorCode::kInvalidArgument, "feedback_gain: dimension mismatch");
  }
  return (b.transpose() * pi) / beta;
}

RiccatiSolution solve_shifted_riccati(const MatrixRef& a_hat,
                                      const MatrixRef& b_hat, double delta,
                                      double cost_beta,
                                      const RiccatiOptions& options,
                                      const IterateCallback& on_iterate) {
  if (!(cost_beta > 0.0)) fail(ErrorCode::kConfig, "riccati: cost beta must be positive");
  const Eigen::Index n = a_hat.rows();
  const Eigen::Index m = b_hat.cols();
  Matrix a_delta = a_hat;
  a_delta.diagonal().array() += delta;
  const Matrix q = Matrix::Identity(n, n);
  const Matrix r = cost_beta * Matrix::Identity(m, m);
  const InitialGuess guess = stabilizing_init(a_delta, b_hat, r);
  RiccatiSolution sol =
      kleinman_newton(a_delta, b_hat, q, r, guess.pi, options, on_iterate);
  sol.delta = delta;
  sol.cost_beta = cost_beta;
  sol.init_dimension = guess.dimension;
  sol.init_abscissa = guess.abscissa;
  return sol;
}

}  // namespace hypoctl
