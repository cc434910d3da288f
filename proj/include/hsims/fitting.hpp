#pragma once

#include <Eigen/Dense>
#include <optional>

#include "hsims/core.hpp"
#include "hsims/indicator.hpp"

namespace hsims {

struct FixedPointConfig {
  double eps = 1e-3;   // stddev floor for the covariance factorization
  double eta = 1e-2;   // softening inside the square root; must be positive
  double tol = 1e-5;   // stop when the combined statistic change drops below
  int max_iter = 20;
};

struct SegmentStats {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

// Plain weighted moments of the pixels assigned to class `cls`: the mean uses
// the weight sum, the covariance divides by (weight sum - 1) and is zero for
// a single-member segment. Throws DegenerateInputError when the class has no
// members.
SegmentStats init_segment_stats(const HyperCube& cube, const LabelField& u, int cls);

// One update of the robust statistics. Distances h are evaluated at the
// current model; the mean is the 1/h-weighted average, and the covariance
// averages (g - mu_new)(g - mu_new)^T with weights u/(2h) over the plain
// weight sum.
SegmentStats fixed_point_step(const HyperCube& cube, const LabelField& u, int cls,
                              const SegmentModel& model,
                              const FixedPointConfig& cfg);

// Iterate fixed_point_step from `init` (or from init_segment_stats when
// absent), regularizing after every update, until the combined change in
// mean, floored stddevs, and eigenvector basis drops below cfg.tol or
// cfg.max_iter is reached.
SegmentModel fit_segment(const HyperCube& cube, const LabelField& u, int cls,
                         const std::optional<SegmentStats>& init,
                         const FixedPointConfig& cfg);

// Data term restricted to one class: sum_px u(px, cls) * f(g_px) with
// f(g) = sqrt((g - mu)^T sigma^-1 (g - mu) + eta) + log det sigma. sigma may
// be any invertible matrix with positive determinant; no symmetry is assumed,
// which lets finite-difference checks probe arbitrary entry perturbations.
double data_energy(const HyperCube& cube, const LabelField& u, int cls,
                   const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                   double eta);

struct EnergyGradients {
  Eigen::VectorXd d_mu;
  Eigen::MatrixXd d_sigma;
};

// Analytic gradients of data_energy at a symmetric positive definite sigma:
//   d/dmu    = sum u/h * sigma^-1 (mu - g)
//   d/dsigma = -sum u/(2h) * sigma^-1 (g-mu)(g-mu)^T sigma^-1
//              + (sum u) * sigma^-1
EnergyGradients data_energy_gradients(const HyperCube& cube, const LabelField& u,
                                      int cls, const Eigen::VectorXd& mu,
                                      const Eigen::MatrixXd& sigma, double eta);

}  // namespace hsims
