#pragma once

#include <Eigen/Dense>

#include "hsims/core.hpp"

namespace hsims::mnf {

// Shift/scale the whole cube so the global minimum is 0 and the global
// maximum is 1. Throws DegenerateInputError for constant cubes and
// NonFiniteError for NaN/inf samples.
HyperCube normalize_cube(const HyperCube& cube);

// Noise second-moment estimate from differences of diagonal neighbours:
// d(i,j) = g(i,j) - g(i+1,j+1). Returns scale * sum(d d^T) / ((H-1)(W-1));
// the default scale 0.5 compensates for differencing two equally noisy
// samples. Requires H, W >= 2. No mean is subtracted from the differences.
Eigen::MatrixXd estimate_noise_covariance(const HyperCube& cube, double scale = 0.5);

// Maximum noise fraction transform. Columns of `basis` sort the projected
// bands by signal-to-noise ratio, descending, and satisfy
// basis^T * sigma_noise * basis = I.
struct MnfModel {
  Eigen::MatrixXd basis;  // L x kept
  Eigen::VectorXd mean;   // length L, subtracted before projection
  Eigen::VectorXd snrs;   // length kept, descending
};

// Core fit given the two covariance estimates. sigma_noise is ridged to be
// positive definite when its smallest eigenvalue is <= 0 (delta =
// 1e-10 * trace / L). The noise matrix is eigendecomposed, data are whitened
// against it, and the whitened signal covariance (sigma_data - sigma_noise,
// transformed) is eigendecomposed in turn; the back-transformed eigenvectors
// form the basis.
MnfModel fit_from_covariances(const Eigen::MatrixXd& sigma_noise,
                              const Eigen::MatrixXd& sigma_data,
                              const Eigen::VectorXd& mean, int kept);

// Estimates both covariances from the cube and fits. kept must be in
// [1, bands].
MnfModel fit_mnf(const HyperCube& cube, int kept);

// y = basis^T (g - mean) per pixel; output has `kept` bands.
HyperCube apply_mnf(const HyperCube& cube, const MnfModel& model);

}  // namespace hsims::mnf
