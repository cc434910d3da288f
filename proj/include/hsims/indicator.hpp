#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "hsims/core.hpp"

namespace hsims {

// Per-segment Gaussian statistics together with the regularized spectral
// factorization used to evaluate distances without ever forming an inverse.
struct SegmentModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;        // symmetrized input covariance, unregularized
  Eigen::MatrixXd eigvecs;      // orthonormal columns, deterministic signs
  Eigen::VectorXd eig_stddevs;  // sqrt of clamped eigenvalues, descending
  Eigen::VectorXd reg_stddevs;  // max(eig_stddev, eps)
  double log_det_reg = 0.0;     // sum log max(sigma_r^2, eps^2)

  // B = diag(reg_stddevs)^-1 * eigvecs^T, stored column-major:
  // whitener_cols[c * L + r] = eigvecs(c, r) / reg_stddevs(r). Shared by the
  // scalar and batch evaluation paths so they agree bitwise.
  std::vector<double> whitener_cols;

  int bands() const { return static_cast<int>(mu.size()); }
};

// Eigendecompose the symmetrized covariance, clamp negative eigenvalues to
// zero, floor every standard deviation at eps. Eigenvalues are ordered
// descending; each eigenvector's largest-magnitude entry is made positive
// (first index on ties) so repeated fits produce identical factors.
SegmentModel regularize_covariance(const Eigen::VectorXd& mu,
                                   const Eigen::MatrixXd& sigma, double eps);

// sqrt((g - mu)^T Sigma_eps^-1 (g - mu) + eta), evaluated as the norm of the
// whitened residual.
double mahalanobis_sqrt(std::span<const double> g, const SegmentModel& model,
                        double eta);

// mahalanobis_sqrt plus the volume penalty log det Sigma_eps.
double indicator_value(std::span<const double> g, const SegmentModel& model,
                       double eta);

// Indicator of every model at every pixel; layout H x W x k, class innermost
// (same indexing as LabelField).
std::vector<double> indicator_field(const HyperCube& cube,
                                    const std::vector<SegmentModel>& models,
                                    double eta);

}  // namespace hsims
