#pragma once

// Spectral gap identification and the Hautus stabilizability test.

#include <optional>
#include <string>
#include <vector>

#include "matkernel.hpp"

namespace hypoctl {

struct SpectralGap {
  /// Size of the leading cluster (1-based count of modes before the gap).
  int index = 0;
  /// |Re lambda_index|.
  double value = 0.0;
  /// Re lambda_index - Re lambda_{index+1}, and that over |Re lambda_index|.
  double width = 0.0;
  double relative = 0.0;
  /// No gap stands out among the inspected modes.
  bool warning = false;
};

/// Largest relative gap among the leading `modes` eigenvalues, which must be
/// sorted by descending real part. Conjugate pairs are never split.
SpectralGap find_spectral_gap(const ComplexVector& sorted, int modes = 10,
                              double min_relative = 0.1);

struct SpectrumReport {
  ComplexVector eigenvalues;
  SpectralGap gap;
};

SpectrumReport spectrum_report(const MatrixRef& a_hat, int modes = 10);

struct HautusMode {
  std::complex<double> eigenvalue;
  /// |<b_i, psi_j>| for each input i (or the row norm for the subspace test).
  std::vector<double> magnitudes;
  double max_magnitude = 0.0;
  /// Smallest singular value of the coupling when the eigenspace has
  /// dimension above one.
  std::optional<double> rank_margin;
  bool passed = false;
};

struct StabilizabilityReport {
  ComplexVector eigenvalues;
  SpectralGap gap;
  double delta = 0.0;
  double hautus_tol = 0.0;
  /// Modes with Re lambda >= -delta.
  std::vector<HautusMode> modes;
  bool subspace_test = false;
  bool passed = false;

  int unstable_count() const { return static_cast<int>(modes.size()); }
  std::string to_json() const;
};

struct HautusOptions {
  double hautus_tol = 1e-8;
  /// Eigenvalues closer than this are treated as a defective cluster.
  double cluster_tol = 1e-10;
  /// Use the invariant-subspace test even for well-separated modes.
  bool force_subspace = false;
  int gap_modes = 10;
};

/// Rejects delta <= 0, delta at or beyond the spectral gap, and shifts that
/// put an eigenvalue on the line Re = -delta.
void validate_shift(const ComplexVector& sorted, const SpectralGap& gap,
                    double delta);

/// `spectrum` must hold left eigenvectors of A_hat (u^H A = lambda u^H).
StabilizabilityReport hautus_check(const MatrixRef& b_hat,
                                   const MatrixRef& a_hat,
                                   const SpectrumResult& spectrum, double delta,
                                   const HautusOptions& options = {});

/// Computes the spectrum (with left eigenvectors) of A_hat itself.
StabilizabilityReport hautus_check(const MatrixRef& b_hat,
                                   const MatrixRef& a_hat, double delta,
                                   const HautusOptions& options = {});

}  // namespace hypoctl
