#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsims/core.hpp"
#include "hsims/io.hpp"

namespace hsims::synth {

struct Rect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
};

struct SynthCluster {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric PSD
  Rect region;
};

struct SynthSpec {
  int height = 0;
  int width = 0;
  std::vector<SynthCluster> clusters;  // regions must partition the grid
  std::optional<double> noise_snr;     // linear signal-to-noise power ratio
  std::uint64_t seed = 0;
};

// Parses the JSON form: height, width, seed, optional noise_snr, and
// clusters = [{mean: [..], covariance: [[..]..], region: {top,left,height,width}}].
SynthSpec parse_spec(const std::string& json_text);

// Samples each pixel from its region's Gaussian, then optionally adds white
// noise sized so that mean signal power / noise power = noise_snr. Ground
// truth holds 1-based region ids. Deterministic in spec.seed under any
// thread count.
std::pair<HyperCube, io::GroundTruth> generate(const SynthSpec& spec);

}  // namespace hsims::synth
