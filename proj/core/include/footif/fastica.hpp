#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace footif {

struct FastIcaOptions {
  Eigen::Index n_components = 2;
  double tolerance = 1e-6;
  int max_iterations = 500;
  std::uint64_t seed = 42;
};

/// Symmetric fixed-point FastICA with the log-cosh contrast.
struct FastIcaResult {
  Eigen::VectorXd mean;       // p
  Eigen::MatrixXd whitening;  // k x p, Lambda^-1/2 E^T
  Eigen::MatrixXd unmixing;   // k x k, orthogonal, acts on whitened data
  int iterations = 0;

  /// Rows map centered observations to the estimated sources: W K.
  [[nodiscard]] Eigen::MatrixXd components() const { return unmixing * whitening; }
};

/// `data` holds one observation per row. Throws Error(DegenerateWhitening) if
/// the covariance has fewer than `n_components` usable eigenvalues and
/// Error(NonConvergence) when the iteration cap is hit.
FastIcaResult fast_ica(const Eigen::MatrixXd& data, const FastIcaOptions& opts);

}  // namespace footif
