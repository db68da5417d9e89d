#include "analyze.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace hypoctl {

namespace {

bool conjugate_partners(const std::complex<double>& a,
                        const std::complex<double>& b) {
  return a.imag() != 0.0 && a == std::conj(b);
}

}  // namespace

SpectralGap find_spectral_gap(const ComplexVector& sorted, int modes,
                              double min_relative) {
  SpectralGap gap;
  const Eigen::Index n = sorted.size();
  if (n == 0) {
    gap.warning = true;
    return gap;
  }
  const Eigen::Index limit = std::min<Eigen::Index>(std::max(modes, 1), n);
  double scale = 0.0;
  for (Eigen::Index j = 0; j < limit; ++j) {
    scale = std::max(scale, std::abs(sorted(j).real()));
  }
  const double floor = 1e-12 * std::max(scale, 1e-300);

  gap.index = 1;
  gap.relative = -1.0;
  for (Eigen::Index k = 0; k + 1 < limit; ++k) {
    if (conjugate_partners(sorted(k), sorted(k + 1))) continue;
    const double width = sorted(k).real() - sorted(k + 1).real();
    const double relative = width / std::max(std::abs(sorted(k).real()), floor);
    if (relative > gap.relative) {
      gap.relative = relative;
      gap.width = width;
      gap.index = static_cast<int>(k + 1);
    }
  }
  if (gap.relative < 0.0) {
    // Nothing to compare against: a single mode (or one conjugate pair).
    gap.index = static_cast<int>(limit);
    gap.relative = 0.0;
    gap.warning = true;
  } else if (gap.relative < min_relative) {
    gap.warning = true;
  }
  gap.value = std::abs(sorted(gap.index - 1).real());
  return gap;
}

SpectrumReport spectrum_report(const MatrixRef& a_hat, int modes) {
  SpectrumReport r;
  r.eigenvalues = eigenvalues(a_hat);
  r.gap = find_spectral_gap(r.eigenvalues, modes);
  return r;
}

void validate_shift(const ComplexVector& sorted, const SpectralGap& gap,
                    double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    fail(ErrorCode::kConfig, "shift delta must be positive and finite");
  }
  if (gap.index > 0 && gap.index < sorted.size()) {
    const double limit = std::abs(sorted(gap.index).real());
    if (delta >= limit) {
      std::ostringstream os;
      os.precision(6);
      os << "shift delta = " << delta << " reaches past the spectral gap: it "
         << "must stay below |Re lambda_" << gap.index + 1 << "| = " << limit
         << " so that finitely many modes are shifted across";
      fail(ErrorCode::kConfig, os.str());
    }
  }
  for (Eigen::Index j = 0; j < sorted.size(); ++j) {
    if (std::abs(sorted(j).real() + delta) < 1e-8) {
      std::ostringstream os;
      os << "shift delta = " << delta << " puts eigenvalue " << sorted(j)
         << " on the imaginary axis of the shifted system";
      fail(ErrorCode::kConfig, os.str());
    }
  }
}

StabilizabilityReport hautus_check(const MatrixRef& b_hat,
                                   const MatrixRef& a_hat,
                                   const SpectrumResult& spectrum, double delta,
                                   const HautusOptions& options) {
  const Eigen::Index n = a_hat.rows();
  if (a_hat.cols() != n || b_hat.rows() != n || spectrum.values.size() != n) {
    fail(ErrorCode::kInvalidArgument, "hautus_check: dimension mismatch");
  }
  StabilizabilityReport report;
  report.eigenvalues = spectrum.values;
  report.gap = find_spectral_gap(spectrum.values, options.gap_modes);
  report.delta = delta;
  report.hautus_tol = options.hautus_tol;
  validate_shift(spectrum.values, report.gap, delta);

  std::vector<Eigen::Index> tested;
  for (Eigen::Index j = 0; j < n && spectrum.values(j).real() >= -delta; ++j) {
    tested.push_back(j);
  }
  bool clustered = false;
  for (std::size_t a = 0; a < tested.size(); ++a) {
    for (std::size_t b = a + 1; b < tested.size(); ++b) {
      const auto la = spectrum.values(tested[a]);
      const auto lb = spectrum.values(tested[b]);
      if (std::abs(la - lb) < options.cluster_tol * std::max(1.0, std::abs(la))) {
        clustered = true;
      }
    }
  }
  report.subspace_test = clustered || options.force_subspace;

  const Eigen::Index m = b_hat.cols();
  if (!report.subspace_test) {
    if (!spectrum.left) {
      fail(ErrorCode::kInvalidArgument,
           "hautus_check: spectrum lacks left eigenvectors");
    }
    for (Eigen::Index j : tested) {
      HautusMode mode;
      mode.eigenvalue = spectrum.values(j);
      const ComplexVector u = spectrum.left->col(j).normalized();
      for (Eigen::Index i = 0; i < m; ++i) {
        // |u^H b| equals the 2-norm of [Re u, Im u]^T b for real b.
        const double re = u.real().dot(b_hat.col(i));
        const double im = u.imag().dot(b_hat.col(i));
        mode.magnitudes.push_back(std::hypot(re, im));
      }
      report.modes.push_back(std::move(mode));
    }
  } else {
    const Matrix at = a_hat.transpose();
    const SchurForm schur = real_schur(
        at, [delta](const std::complex<double>& z) { return z.real() >= -delta; });
    const ComplexVector diag = schur.diagonal_eigenvalues();
    // Left eigenvectors of a_hat inside the unstable left invariant subspace
    // are u = U1 y with S11 y = lambda y; test each eigenspace as a whole so
    // a defective block contributes only its true eigenvectors.
    const Eigen::Index k = schur.selected;
    const ComplexMatrix s11 = schur.s.topLeftCorner(k, k).cast<std::complex<double>>();
    const ComplexMatrix projected =
        (schur.u.leftCols(k).transpose() * b_hat).cast<std::complex<double>>();
    const double null_tol = 1e-8 * std::max(1.0, s11.norm());
    for (Eigen::Index r = 0; r < k; ++r) {
      HautusMode mode;
      mode.eigenvalue = diag(r);
      const ComplexMatrix shifted =
          s11 - diag(r) * ComplexMatrix::Identity(k, k);
      const Eigen::JacobiSVD<ComplexMatrix> svd(shifted, Eigen::ComputeFullV);
      Eigen::Index dim = 0;
      for (Eigen::Index i = 0; i < k; ++i) dim += svd.singularValues()(i) <= null_tol;
      dim = std::max<Eigen::Index>(dim, 1);
      const ComplexMatrix y = svd.matrixV().rightCols(dim);
      const ComplexMatrix coupling = y.transpose() * projected;
      for (Eigen::Index i = 0; i < m; ++i) {
        mode.magnitudes.push_back(coupling.col(i).norm());
      }
      if (dim > 1) {
        // Every direction of the eigenspace must be reached.
        const Eigen::JacobiSVD<ComplexMatrix> rank(coupling);
        mode.rank_margin = rank.singularValues().size() < dim
                               ? 0.0
                               : rank.singularValues()(dim - 1);
      }
      report.modes.push_back(std::move(mode));
    }
  }

  report.passed = true;
  for (HautusMode& mode : report.modes) {
    mode.max_magnitude = mode.magnitudes.empty()
                             ? 0.0
                             : *std::max_element(mode.magnitudes.begin(),
                                                 mode.magnitudes.end());
    mode.passed = mode.max_magnitude > options.hautus_tol &&
                  (!mode.rank_margin || *mode.rank_margin > options.hautus_tol);
    report.passed = report.passed && mode.passed;
  }
  return report;
}

StabilizabilityReport hautus_check(const MatrixRef& b_hat,
                                   const MatrixRef& a_hat, double delta,
                                   const HautusOptions& options) {
  const SpectrumResult spectrum =
      eig(a_hat, {.right = false, .left = !options.force_subspace});
  return hautus_check(b_hat, a_hat, spectrum, delta, options);
}

std::string StabilizabilityReport::to_json() const {
  using nlohmann::json;
  json j;
  json values = json::array();
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    values.push_back({eigenvalues(k).real(), eigenvalues(k).imag()});
  }
  j["eigenvalues"] = std::move(values);
  j["gap"] = {{"index", gap.index},
              {"value", gap.value},
              {"width", gap.width},
              {"relative", gap.relative},
              {"warning", gap.warning}};
  j["delta"] = delta;
  j["hautus_tol"] = hautus_tol;
  j["unstable_count"] = unstable_count();
  j["subspace_test"] = subspace_test;
  json ms = json::array();
  for (const HautusMode& m : modes) {
    ms.push_back({{"eigenvalue", {m.eigenvalue.real(), m.eigenvalue.imag()}},
                  {"magnitudes", m.magnitudes},
                  {"max_magnitude", m.max_magnitude},
                  {"passed", m.passed}});
    if (m.rank_margin) ms.back()["rank_margin"] = *m.rank_margin;
  }
  j["modes"] = std::move(ms);
  j["passed"] = passed;
  return j.dump(2);
}

}  // namespace hypoctl
