#include "hsims/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hsims/core.hpp"

namespace hsims::eval {

std::vector<std::int64_t> confusion_matrix(std::span<const std::uint16_t> pred,
                                           std::span<const std::uint16_t> reference,
                                           int k) {
  if (k < 1) throw std::invalid_argument("confusion_matrix: k must be positive");
  if (pred.size() != reference.size())
    throw std::invalid_argument("confusion_matrix: label counts differ");
  std::vector<std::int64_t> conf(static_cast<std::size_t>(k) * k, 0);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    int a = reference[i];
    if (a == 0) continue;
    int b = pred[i];
    if (a > k)
      throw std::invalid_argument("confusion_matrix: reference label exceeds k");
    if (b < 1 || b > k)
      throw std::invalid_argument("confusion_matrix: prediction outside 1..k");
    ++conf[static_cast<std::size_t>(a - 1) * k + (b - 1)];
  }
  return conf;
}

std::vector<int> hungarian_match(const std::vector<std::int64_t>& confusion, int k) {
  if (k < 1) throw std::invalid_argument("hungarian_match: k must be positive");
  if (confusion.size() != static_cast<std::size_t>(k) * k)
    throw std::invalid_argument("hungarian_match: matrix is not k x k");

  // Assignment by potentials on the cost matrix (max entry minus value), so
  // maximizing the matched diagonal. Counts are integers, so everything here
  // stays exact.
  std::int64_t top = 0;
  for (std::int64_t v : confusion) {
    if (v < 0) throw std::invalid_argument("hungarian_match: negative count");
    top = std::max(top, v);
  }
  auto cost = [&](int row, int col) { return top - confusion[static_cast<std::size_t>(row) * k + col]; };

  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> pu(k + 1, 0), pv(k + 1, 0), minv(k + 1);
  std::vector<int> match(k + 1, 0), way(k + 1, 0);
  for (int i = 1; i <= k; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      int i0 = match[j0], j1 = 0;
      std::int64_t delta = inf;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        std::int64_t cur = cost(i0 - 1, j - 1) - pu[i0] - pv[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          pu[match[j]] += delta;
          pv[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> perm(k);
  for (int j = 1; j <= k; ++j) perm[j - 1] = match[j] - 1;
  return perm;
}

Scores scores(const std::vector<std::int64_t>& confusion, int k,
              const std::vector<int>& perm) {
  if (k < 1) throw std::invalid_argument("scores: k must be positive");
  if (confusion.size() != static_cast<std::size_t>(k) * k)
    throw std::invalid_argument("scores: matrix is not k x k");
  if (perm.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("scores: permutation size is not k");
  std::vector<char> seen(k, 0);
  for (int p : perm) {
    if (p < 0 || p >= k || seen[p])
      throw std::invalid_argument("scores: not a permutation");
    seen[p] = 1;
  }

  std::vector<std::int64_t> row(k, 0), col(k, 0);
  std::int64_t total = 0, diag = 0;
  for (int a = 0; a < k; ++a) {
    for (int j = 0; j < k; ++j) {
      std::int64_t v = confusion[static_cast<std::size_t>(a) * k + j];
      row[a] += v;
      col[perm[j]] += v;  // column j relabels to class perm[j]
      total += v;
      if (perm[j] == a) diag += v;
    }
  }
  if (total == 0) throw DegenerateInputError("scores: no labeled pixels");

  Scores s;
  s.oa = static_cast<double>(diag) / static_cast<double>(total);

  double aa = 0.0;
  int present = 0;
  for (int a = 0; a < k; ++a) {
    if (row[a] == 0) continue;
    std::int64_t d = 0;
    for (int j = 0; j < k; ++j)
      if (perm[j] == a) d = confusion[static_cast<std::size_t>(a) * k + j];
    aa += static_cast<double>(d) / static_cast<double>(row[a]);
    ++present;
  }
  s.aa = aa / static_cast<double>(present);

  double pe = 0.0;
  double tt = static_cast<double>(total);
  for (int a = 0; a < k; ++a)
    pe += (static_cast<double>(row[a]) / tt) * (static_cast<double>(col[a]) / tt);
  if (1.0 - pe < 1e-12) {
    s.kappa = (1.0 - s.oa < 1e-12) ? 1.0 : 0.0;
  } else {
    s.kappa = (s.oa - pe) / (1.0 - pe);
  }
  return s;
}

Scores evaluate(std::span<const std::uint16_t> pred,
                std::span<const std::uint16_t> reference, int k) {
  auto conf = confusion_matrix(pred, reference, k);
  auto perm = hungarian_match(conf, k);
  return scores(conf, k, perm);
}

}  // namespace hsims::eval
