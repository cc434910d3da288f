#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "hsims/core.hpp"
#include "hsims/fitting.hpp"
#include "hsims/indicator.hpp"

namespace hsims::pipeline {

enum class IndicatorMode {
  robust_anisotropic,
  squared_euclidean,
};

struct PipelineConfig {
  int k = 2;                 // number of segments, >= 2
  double lambda = 0.1;       // perimeter weight; 0 selects pointwise argmin
  double eps = 1e-3;         // covariance stddev floor
  double eta = 1e-2;         // robust softening, positive in robust mode
  std::uint64_t seed = 0;
  IndicatorMode mode = IndicatorMode::robust_anisotropic;
  // When set and smaller than the cube's band count, the cube is reduced
  // with a noise-whitening transform fitted on the (already normalized)
  // input before clustering.
  std::optional<int> mnf_kept;

  double outer_tol = 1e-6;
  int outer_max = 20;
  double fp_tol = 1e-5;
  int fp_max_iter = 20;
  double pdhg_tol = 1e-6;
  int pdhg_max_iter = 1000;
  int kmeans_max_iter = 300;
};

struct IterationRecord {
  double energy = 0.0;  // <u, f> + lambda * TV(u) after thresholding
  std::vector<std::size_t> segment_sizes;
  int pdhg_iterations = 0;
  double mean_shift = 0.0;  // size-weighted sup-norm mean movement
};

struct SegmentationResult {
  LabelField labels;  // one-hot
  std::vector<SegmentModel> models;
  std::vector<IterationRecord> trace;
  int outer_iterations = 0;
};

// One-hot field selecting each pixel's largest weight; ties resolve to the
// smallest class index.
LabelField threshold(const LabelField& u);

// Size-weighted mean movement: sum_l (|segment l| / N) * ||mu_l - mu_l'||_inf,
// sizes taken from the thresholded current labeling.
double mean_shift(const LabelField& u_curr,
                  const std::vector<Eigen::VectorXd>& mu_curr,
                  const std::vector<Eigen::VectorXd>& mu_prev);
bool outer_stop(const LabelField& u_curr,
                const std::vector<Eigen::VectorXd>& mu_curr,
                const std::vector<Eigen::VectorXd>& mu_prev, double tol);

// Plain squared Euclidean distance to each segment mean; layout H x W x k.
std::vector<double> indicator_field_ms2(const HyperCube& cube,
                                        const std::vector<Eigen::VectorXd>& means);

// Alternating minimization: cluster seeding, then rounds of statistics
// fitting, indicator evaluation, relaxed labeling, and thresholding until
// the segment means settle. Expects a normalized cube.
SegmentationResult segment(const HyperCube& cube, const PipelineConfig& cfg);

}  // namespace hsims::pipeline
