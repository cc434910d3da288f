#pragma once

#include <cstdint>
#include <vector>

#include "hsims/core.hpp"

namespace hsims {

struct KmeansResult {
  // 1-based class ids, one per row of the input.
  std::vector<int> labels;
  // k x dims, row-major; each center is the mean of its members.
  std::vector<double> centers;
  double inertia = 0.0;
  int iterations = 0;
};

// Lloyd iterations from a k-means++ seeding drawn from rng. Ties in the
// assignment go to the smallest center index; empty clusters are re-seeded
// to the point farthest from its assigned center. Deterministic for a fixed
// rng state.
KmeansResult kmeans(const std::vector<double>& data, std::size_t n, int dims,
                    int k, Rng& rng, int max_iter = 300);

// One-hot field from 1-based labels laid out row-major on an H x W grid.
LabelField labels_to_field(const std::vector<int>& labels, int height,
                           int width, int classes);

}  // namespace hsims
