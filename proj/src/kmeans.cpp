#include "hsims/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace hsims {

namespace {

std::span<const double> row(const std::vector<double>& data, std::size_t i, int dims) {
  return {data.data() + i * dims, static_cast<std::size_t>(dims)};
}

}  // namespace

KmeansResult kmeans(const std::vector<double>& data, std::size_t n, int dims,
                    int k, Rng& rng, int max_iter) {
  if (dims < 1 || k < 1) throw std::invalid_argument("kmeans: dims and k must be positive");
  if (n < static_cast<std::size_t>(k))
    throw std::invalid_argument("kmeans: fewer points than clusters");
  if (data.size() != n * dims)
    throw std::invalid_argument("kmeans: data size does not match n x dims");

  std::vector<double> centers(static_cast<std::size_t>(k) * dims);
  auto center = [&](int c) {
    return std::span<double>(centers.data() + static_cast<std::size_t>(c) * dims,
                             static_cast<std::size_t>(dims));
  };

  // k-means++ seeding: first center uniform, the rest drawn with probability
  // proportional to the squared distance to the nearest chosen center.
  std::vector<double> d2(n);
  {
    std::size_t first = rng.next_below(n);
    std::copy_n(data.data() + first * dims, dims, center(0).data());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = squared_distance(row(data, i, dims), center(0));
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += d2[i];
      std::size_t pick = 0;
      if (total > 0.0) {
        double target = rng.next_double() * total;
        double cum = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          cum += d2[i];
          if (cum > target) {
            pick = i;
            break;
          }
        }
      } else {
        // All remaining mass sits on the chosen centers; any point works.
        pick = rng.next_below(n);
      }
      std::copy_n(data.data() + pick * dims, dims, center(c).data());
      for (std::size_t i = 0; i < n; ++i)
        d2[i] = std::min(d2[i], squared_distance(row(data, i, dims), center(c)));
    }
  }

  std::vector<int> assign(n, -1);
  std::vector<double> best(n);
  std::vector<std::size_t> counts(k);
  int iterations = 0;

  auto assign_all = [&]() {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto x = row(data, i, dims);
      int arg = 0;
      double bd = squared_distance(x, center(0));
      for (int c = 1; c < k; ++c) {
        double d = squared_distance(x, center(c));
        if (d < bd) {
          bd = d;
          arg = c;
        }
      }
      if (arg != assign[i]) changed = true;
      assign[i] = arg;
      best[i] = bd;
    }
    return changed;
  };

  assign_all();
  for (int it = 0; it < max_iter; ++it) {
    // Re-seed empties before the mean update so every center keeps members.
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) ++counts[assign[i]];
    for (int c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] <= 1) continue;  // don't orphan another cluster
        if (best[i] > fd) {
          fd = best[i];
          far = i;
        }
      }
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
      best[far] = 0.0;
    }

    std::fill(centers.begin(), centers.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto x = row(data, i, dims);
      double* ctr = centers.data() + static_cast<std::size_t>(assign[i]) * dims;
      for (int c = 0; c < dims; ++c) ctr[c] += x[c];
    }
    for (int c = 0; c < k; ++c) {
      double cnt = static_cast<double>(counts[c]);
      for (int d = 0; d < dims; ++d) centers[static_cast<std::size_t>(c) * dims + d] /= cnt;
    }

    ++iterations;
    if (!assign_all()) break;
  }

  KmeansResult res;
  res.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.labels[i] = assign[i] + 1;
  res.centers = std::move(centers);
  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) res.inertia += best[i];
  res.iterations = iterations;
  return res;
}

LabelField labels_to_field(const std::vector<int>& labels, int height,
                           int width, int classes) {
  if (labels.size() != static_cast<std::size_t>(height) * width)
    throw std::invalid_argument("labels_to_field: label count does not match grid");
  LabelField u(height, width, classes);
  for (std::size_t px = 0; px < labels.size(); ++px) {
    int l = labels[px];
    if (l < 1 || l > classes)
      throw std::invalid_argument("labels_to_field: label out of range");
    u.data()[px * classes + (l - 1)] = 1.0;
  }
  return u;
}

}  // namespace hsims
