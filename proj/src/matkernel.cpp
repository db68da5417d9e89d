#include "matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "error.hpp"

namespace hypoctl {
namespace {

// Diagonal blocks of a quasi-triangular matrix narrower than this are solved
// column by column; larger ones are split recursively so the bulk of the work
// runs through matrix-matrix products.
constexpr Eigen::Index kSylvesterBlock = 48;

void require_square_finite(const MatrixRef& a, const char* who) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << who << ": matrix must be square, got " << a.rows() << "x" << a.cols();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  if (!a.allFinite()) {
    fail(ErrorCode::kInvalidArgument,
         std::string(who) + ": matrix contains NaN or Inf entries");
  }
}

std::string format_eigenvalue(const std::complex<double>& z) {
  std::ostringstream os;
  os.precision(6);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

// Size (1 or 2) of the diagonal block of `s` starting at row `i`.
Eigen::Index block_size(const MatrixRef& s, Eigen::Index i) {
  return (i + 1 < s.rows() && s(i + 1, i) != 0.0) ? 2 : 1;
}

// Split point that does not cut through a 2x2 diagonal block.
Eigen::Index split_point(const MatrixRef& s) {
  Eigen::Index p = s.rows() / 2;
  if (p > 0 && p < s.rows() && s(p, p - 1) != 0.0) ++p;
  return p;
}

// Solves A^T Y + Y B = C for blocks of order at most 2.
void solve_small_sylvester(const MatrixRef& a, const MatrixRef& b,
                           Eigen::Ref<Matrix> c) {
  const Eigen::Index r = a.rows();
  const Eigen::Index s = b.rows();
  if (r == 1 && s == 1) {
    const double denom = a(0, 0) + b(0, 0);
    const double scale = std::max({std::abs(a(0, 0)), std::abs(b(0, 0)), 1.0});
    if (std::abs(denom) <= 1e-14 * scale) {
      std::ostringstream os;
      os << "Sylvester block is numerically singular (lambda_i + lambda_j = "
         << denom << ")";
      fail(ErrorCode::kNumeric, os.str());
    }
    c(0, 0) /= denom;
    return;
  }
  using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
  const Eigen::Index k = r * s;
  Small system = Small::Zero(k, k);
  // vec(A^T Y) = (I_s kron A^T) vec(Y); vec(Y B) = (B^T kron I_r) vec(Y).
  for (Eigen::Index j = 0; j < s; ++j) {
    system.block(j * r, j * r, r, r) += a.transpose();
    for (Eigen::Index l = 0; l < s; ++l) {
      for (Eigen::Index i = 0; i < r; ++i) {
        system(j * r + i, l * r + i) += b(l, j);
      }
    }
  }
  Eigen::FullPivLU<Small> lu(system);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > 1e-14 * std::max(lu.maxPivot(), 1.0))) {
    fail(ErrorCode::kNumeric,
         "Sylvester block is numerically singular (near-resonant eigenvalues)");
  }
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> rhs(k);
  for (Eigen::Index j = 0; j < s; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) rhs(j * r + i) = c(i, j);
  }
  const Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> y = lu.solve(rhs);
  for (Eigen::Index j = 0; j < s; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) c(i, j) = y(j * r + i);
  }
}

// Column-by-column Bartels-Stewart sweep for small quasi-triangular factors.
void sylvester_sweep(const MatrixRef& sa, const MatrixRef& sb,
                     Eigen::Ref<Matrix> c) {
  const Eigen::Index m = sa.rows();
  const Eigen::Index n = sb.rows();
  Eigen::Index j = 0;
  while (j < n) {
    const Eigen::Index cs = block_size(sb, j);
    if (j > 0) {
      c.middleCols(j, cs).noalias() -=
          c.leftCols(j) * sb.block(0, j, j, cs);
    }
    Eigen::Index i = 0;
    while (i < m) {
      const Eigen::Index rs = block_size(sa, i);
      if (i > 0) {
        c.block(i, j, rs, cs).noalias() -=
            sa.block(0, i, i, rs).transpose() * c.block(0, j, i, cs);
      }
      solve_small_sylvester(sa.block(i, i, rs, rs), sb.block(j, j, cs, cs),
                            c.block(i, j, rs, cs));
      i += rs;
    }
    j += cs;
  }
}

void sylvester_recursive(const MatrixRef& sa, const MatrixRef& sb,
                         Eigen::Ref<Matrix> c) {
  const Eigen::Index m = sa.rows();
  const Eigen::Index n = sb.rows();
  if (m == 0 || n == 0) return;
  if (m <= kSylvesterBlock && n <= kSylvesterBlock) {
    sylvester_sweep(sa, sb, c);
    return;
  }
  if (n >= m) {
    const Eigen::Index q = split_point(sb);
    sylvester_recursive(sa, sb.topLeftCorner(q, q), c.leftCols(q));
    c.rightCols(n - q).noalias() -=
        c.leftCols(q) * sb.topRightCorner(q, n - q);
    sylvester_recursive(sa, sb.bottomRightCorner(n - q, n - q),
                        c.rightCols(n - q));
  } else {
    const Eigen::Index p = split_point(sa);
    sylvester_recursive(sa.topLeftCorner(p, p), sb, c.topRows(p));
    c.bottomRows(m - p).noalias() -=
        sa.topRightCorner(p, m - p).transpose() * c.topRows(p);
    sylvester_recursive(sa.bottomRightCorner(m - p, m - p), sb,
                        c.bottomRows(m - p));
  }
}

// Solves S^T Y + Y S = C in place for symmetric C, using Y12 = Y21^T.
void lyapunov_recursive(const MatrixRef& s, Eigen::Ref<Matrix> c) {
  const Eigen::Index n = s.rows();
  if (n <= kSylvesterBlock) {
    sylvester_sweep(s, s, c);
    return;
  }
  const Eigen::Index p = split_point(s);
  const Eigen::Index q = n - p;
  const auto s11 = s.topLeftCorner(p, p);
  const auto s12 = s.topRightCorner(p, q);
  const auto s22 = s.bottomRightCorner(q, q);

  lyapunov_recursive(s11, c.topLeftCorner(p, p));
  c.topRightCorner(p, q).noalias() -= c.topLeftCorner(p, p) * s12;
  sylvester_recursive(s11, s22, c.topRightCorner(p, q));
  c.bottomLeftCorner(q, p) = c.topRightCorner(p, q).transpose();
  Matrix coupling(q, q);
  coupling.noalias() = s12.transpose() * c.topRightCorner(p, q);
  c.bottomRightCorner(q, q) -= coupling + coupling.transpose();
  lyapunov_recursive(s22, c.bottomRightCorner(q, q));
}

}  // namespace

bool spectral_order(const std::complex<double>& a,
                    const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

SpectrumResult eig(const MatrixRef& a, EigOptions options) {
  require_square_finite(a, "eig");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SpectrumResult out;
  if (n == 0) return out;

  Matrix work = a;
  Vector wr(n), wi(n);
  Matrix vl(options.left ? n : 1, options.left ? n : 1);
  Matrix vr(options.right ? n : 1, options.right ? n : 1);
  const lapack_int info = LAPACKE_dgeev(
      LAPACK_COL_MAJOR, options.left ? 'V' : 'N', options.right ? 'V' : 'N', n,
      work.data(), n, wr.data(), wi.data(), vl.data(), vl.rows(), vr.data(),
      vr.rows());
  if (info > 0) {
    std::ostringstream os;
    os << "eig: QR iteration failed to converge for a " << n << "x" << n
       << " matrix (" << info << " eigenvalues unresolved)";
    fail(ErrorCode::kConvergence, os.str());
  }
  if (info < 0) fail(ErrorCode::kInvalidArgument, "eig: invalid LAPACK call");

  ComplexVector values(n);
  for (lapack_int j = 0; j < n; ++j) values(j) = {wr(j), wi(j)};

  // dgeev stores a conjugate pair as (re, im) in two consecutive columns.
  auto unpack = [&](const Matrix& packed) {
    ComplexMatrix vecs(n, n);
    for (lapack_int j = 0; j < n; ++j) {
      if (wi(j) == 0.0) {
        vecs.col(j) = packed.col(j).cast<std::complex<double>>();
      } else if (wi(j) > 0.0) {
        for (lapack_int i = 0; i < n; ++i) {
          vecs(i, j) = {packed(i, j), packed(i, j + 1)};
          vecs(i, j + 1) = {packed(i, j), -packed(i, j + 1)};
        }
        ++j;
      }
    }
    return vecs;
  };

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     return spectral_order(values(i), values(j));
                   });

  out.values.resize(n);
  for (lapack_int k = 0; k < n; ++k) out.values(k) = values(order[k]);
  if (options.right) {
    const ComplexMatrix r = unpack(vr);
    out.right.resize(n, n);
    for (lapack_int k = 0; k < n; ++k) out.right.col(k) = r.col(order[k]);
  }
  if (options.left) {
    const ComplexMatrix l = unpack(vl);
    ComplexMatrix sorted(n, n);
    for (lapack_int k = 0; k < n; ++k) sorted.col(k) = l.col(order[k]);
    out.left = std::move(sorted);
  }
  return out;
}

ComplexVector eigenvalues(const MatrixRef& a) {
  return eig(a, {.right = false, .left = false}).values;
}

ComplexVector SchurForm::diagonal_eigenvalues() const {
  const Eigen::Index n = s.rows();
  ComplexVector values(n);
  Eigen::Index i = 0;
  while (i < n) {
    if (block_size(s, i) == 2) {
      const double re = 0.5 * (s(i, i) + s(i + 1, i + 1));
      const double det = s(i, i) * s(i + 1, i + 1) - s(i, i + 1) * s(i + 1, i);
      const double disc = re * re - det;
      const double im = std::sqrt(std::max(-disc, 0.0));
      values(i) = {re, im};
      values(i + 1) = {re, -im};
      i += 2;
    } else {
      values(i) = {s(i, i), 0.0};
      ++i;
    }
  }
  return values;
}

SchurForm real_schur(const MatrixRef& a, const EigenvalueSelector& select) {
  require_square_finite(a, "real_schur");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SchurForm out;
  out.s = a;
  out.u.resize(n, n);
  if (n == 0) return out;

  Vector wr(n), wi(n);
  lapack_int sdim = 0;
  lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, out.s.data(), n,
                    &sdim, wr.data(), wi.data(), out.u.data(), n);
  if (info != 0) {
    std::ostringstream os;
    os << "real_schur: QR iteration failed for a " << n << "x" << n
       << " matrix (info " << info << ")";
    fail(ErrorCode::kConvergence, os.str());
  }
  if (!select) return out;

  std::vector<lapack_logical> chosen(n, 0);
  for (lapack_int j = 0; j < n; ++j) {
    if (select({wr(j), wi(j)})) {
      chosen[j] = 1;
      if (wi(j) != 0.0) {
        // Conjugate partners are selected together.
        const lapack_int partner = wi(j) > 0.0 ? j + 1 : j - 1;
        chosen[partner] = 1;
      }
    }
  }
  // The LAPACKE wrapper for dtrsen mishandles its workspace query in some
  // distributions, so the Fortran routine is called with explicit storage.
  lapack_int m = 0;
  double cond_s = 0.0, sep = 0.0;
  const char job = 'N', compq = 'V';
  const lapack_int lwork = std::max<lapack_int>(1, n);
  const lapack_int liwork = 1;
  std::vector<double> work(static_cast<std::size_t>(lwork));
  lapack_int iwork = 0;
  LAPACK_dtrsen(&job, &compq, chosen.data(), &n, out.s.data(), &n,
                out.u.data(), &n, wr.data(), wi.data(), &m, &cond_s, &sep,
                work.data(), &lwork, &iwork, &liwork, &info);
  if (info == 1) {
    std::ostringstream os;
    os << "real_schur: reordering failed, swap too ill-conditioned near "
          "eigenvalues ";
    for (lapack_int j = 0; j + 1 < n; ++j) {
      if (chosen[j] != chosen[j + 1]) {
        os << format_eigenvalue({wr(j), wi(j)}) << " / "
           << format_eigenvalue({wr(j + 1), wi(j + 1)});
        break;
      }
    }
    fail(ErrorCode::kNumeric, os.str());
  }
  if (info != 0) fail(ErrorCode::kInvalidArgument, "real_schur: bad dtrsen call");
  out.selected = m;
  out.ordered = true;
  return out;
}

void solve_quasi_triangular_sylvester(const MatrixRef& sa, const MatrixRef& sb,
                                      Eigen::Ref<Matrix> c) {
  if (c.rows() != sa.rows() || c.cols() != sb.rows()) {
    fail(ErrorCode::kInvalidArgument, "Sylvester: dimension mismatch");
  }
  sylvester_recursive(sa, sb, c);
}

Matrix lyapunov_solve(const SchurForm& schur, const MatrixRef& q) {
  const Eigen::Index n = schur.s.rows();
  if (q.rows() != n || q.cols() != n) {
    fail(ErrorCode::kInvalidArgument, "lyapunov_solve: dimension mismatch");
  }
  if (!q.allFinite()) {
    fail(ErrorCode::kInvalidArgument, "lyapunov_solve: Q has NaN or Inf");
  }
  const ComplexVector values = schur.diagonal_eigenvalues();
  std::vector<std::complex<double>> offending;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(values(i).real() < 0.0)) offending.push_back(values(i));
  }
  if (!offending.empty()) {
    std::ostringstream os;
    os << "lyapunov_solve: A is not stable; eigenvalues with Re >= 0:";
    for (const auto& z : offending) os << " " << format_eigenvalue(z);
    fail(ErrorCode::kNumeric, os.str());
  }

  // S^T Y + Y S = -U^T Q U with Y = U^T X U.
  Matrix tmp(n, n);
  tmp.noalias() = q * schur.u;
  Matrix y(n, n);
  y.noalias() = -schur.u.transpose() * tmp;
  y = 0.5 * (y + y.transpose()).eval();
  lyapunov_recursive(schur.s, y);
  tmp.noalias() = schur.u * y;
  Matrix x(n, n);
  x.noalias() = tmp * schur.u.transpose();
  return 0.5 * (x + x.transpose());
}

Matrix lyapunov_solve(const MatrixRef& a, const MatrixRef& q) {
  require_square_finite(a, "lyapunov_solve");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    fail(ErrorCode::kInvalidArgument, "lyapunov_solve: Q is not symmetric");
  }
  return lyapunov_solve(real_schur(a), q);
}

Matrix care_small(const MatrixRef& a, const MatrixRef& b, const MatrixRef& q,
                  const MatrixRef& r) {
  require_square_finite(a, "care_small");
  const Eigen::Index n = a.rows();
  if (b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != b.cols() || r.cols() != b.cols()) {
    fail(ErrorCode::kInvalidArgument, "care_small: dimension mismatch");
  }
  Eigen::LLT<Matrix> r_chol(r);
  if (r_chol.info() != Eigen::Success) {
    fail(ErrorCode::kInvalidArgument, "care_small: R is not positive definite");
  }
  if (n == 0) return Matrix(0, 0);

  Matrix hamiltonian(2 * n, 2 * n);
  hamiltonian.topLeftCorner(n, n) = a;
  hamiltonian.topRightCorner(n, n) = -b * r_chol.solve(b.transpose());
  hamiltonian.bottomLeftCorner(n, n) = -q;
  hamiltonian.bottomRightCorner(n, n) = -a.transpose();

  const double tol = 1e-10 * std::max(1.0, hamiltonian.norm());
  const ComplexVector values = eigenvalues(hamiltonian);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i).real()) <= tol) {
      fail(ErrorCode::kNotStabilizable,
           "care_small: Hamiltonian has eigenvalue " +
               format_eigenvalue(values(i)) +
               " on the imaginary axis; pair is not stabilizable/detectable "
               "at this block");
    }
  }
  const SchurForm schur = real_schur(
      hamiltonian, [](const std::complex<double>& z) { return z.real() < 0.0; });
  if (schur.selected != n) {
    fail(ErrorCode::kNotStabilizable,
         "care_small: stable invariant subspace has wrong dimension");
  }
  const Matrix x1 = schur.u.topLeftCorner(n, n);
  const Matrix x2 = schur.u.bottomLeftCorner(n, n);
  Eigen::JacobiSVD<Matrix> svd(x1);
  const auto& sv = svd.singularValues();
  if (!(sv(n - 1) > 1e-12 * sv(0))) {
    fail(ErrorCode::kNumeric,
         "care_small: basis block X1 is singular; Riccati solution is "
         "ill-conditioned");
  }
  // P X1 = X2  <=>  X1^T P^T = X2^T.
  const Matrix p = x1.transpose().fullPivLu().solve(x2.transpose()).transpose();
  return 0.5 * (p + p.transpose());
}

Matrix stable_invariant_subspace(const MatrixRef& a, double threshold,
                                 double gap_tolerance) {
  require_square_finite(a, "stable_invariant_subspace");
  const SchurForm schur =
      real_schur(a, [threshold](const std::complex<double>& z) {
        return z.real() >= threshold;
      });
  const ComplexVector values = schur.diagonal_eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i).real() - threshold) < gap_tolerance) {
      std::ostringstream os;
      os << "stable_invariant_subspace: eigenvalue "
         << format_eigenvalue(values(i)) << " lies on the threshold line Re = "
         << threshold << "; choose a different threshold";
      fail(ErrorCode::kNumeric, os.str());
    }
  }
  return schur.u.leftCols(schur.selected);
}

double spectral_abscissa(const ComplexVector& values) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    best = std::max(best, values(i).real());
  }
  return best;
}

Matrix kron(const MatrixRef& a, const MatrixRef& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace hypoctl
