#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hsims::eval {

struct Scores {
  double oa = 0.0;
  double aa = 0.0;
  double kappa = 0.0;
};

// k x k row-major confusion matrix over the labeled pixels. Row = reference
// class - 1, column = predicted class - 1. Reference label 0 marks unlabeled
// pixels and is skipped; a prediction of 0 on a labeled pixel is an error.
std::vector<std::int64_t> confusion_matrix(std::span<const std::uint16_t> pred,
                                           std::span<const std::uint16_t> reference,
                                           int k);

// Optimal class matching: perm[j] is the reference row assigned to predicted
// column j, maximizing the matched diagonal. Exact integer arithmetic.
std::vector<int> hungarian_match(const std::vector<std::int64_t>& confusion, int k);

// Overall accuracy, average (per-class) accuracy over the classes present in
// the reference, and Cohen's kappa, all after applying the matching.
Scores scores(const std::vector<std::int64_t>& confusion, int k,
              const std::vector<int>& perm);

Scores evaluate(std::span<const std::uint16_t> pred,
                std::span<const std::uint16_t> reference, int k);

}  // namespace hsims::eval
