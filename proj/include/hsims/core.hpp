#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hsims {

// Thrown when numeric input contains NaN or infinity.
struct NonFiniteError : std::runtime_error {
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an input is structurally valid but numerically unusable
// (constant image handed to the normalizer, empty segment, zero noise).
struct DegenerateInputError : std::runtime_error {
  explicit DegenerateInputError(const std::string& what) : std::runtime_error(what) {}
};

// Dense H x W x L spectral raster. Row-major, band index innermost, so the
// spectrum of one pixel is contiguous.
class HyperCube {
 public:
  HyperCube() = default;
  HyperCube(int height, int width, int bands);
  HyperCube(int height, int width, int bands, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int bands() const { return bands_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }

  double& at(int i, int j, int b) { return data_[flat(i, j, b)]; }
  double at(int i, int j, int b) const { return data_[flat(i, j, b)]; }

  // Bounds-checked view of one pixel's spectrum.
  std::span<const double> spectrum(int i, int j) const;
  std::span<double> spectrum(int i, int j);
  std::span<const double> spectrum(std::size_t pixel) const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;

 private:
  std::size_t flat(int i, int j, int b) const {
    return (static_cast<std::size_t>(i) * width_ + j) * bands_ + b;
  }
  void check_pixel(int i, int j) const;

  int height_ = 0;
  int width_ = 0;
  int bands_ = 0;
  std::vector<double> data_;
};

// Per-pixel class weights, H x W x k with the class index innermost. The
// relaxed labeling keeps each pixel's row on the unit simplex; thresholded
// fields are one-hot.
class LabelField {
 public:
  LabelField() = default;
  LabelField(int height, int width, int classes);
  LabelField(int height, int width, int classes, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int classes() const { return classes_; }
  std::size_t pixels() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }

  double& at(int i, int j, int l) { return data_[flat(i, j, l)]; }
  double at(int i, int j, int l) const { return data_[flat(i, j, l)]; }

  std::span<const double> pixel(std::size_t px) const {
    return {data_.data() + px * classes_, static_cast<std::size_t>(classes_)};
  }
  std::span<double> pixel(std::size_t px) {
    return {data_.data() + px * classes_, static_cast<std::size_t>(classes_)};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // Largest deviation from the simplex constraints over all pixels:
  // max(negativity, |row sum - 1|).
  double simplex_violation() const;
  bool is_one_hot() const;

  // Index of the largest weight at a pixel; ties resolve to the smallest
  // class index.
  int argmax_class(std::size_t px) const;

 private:
  std::size_t flat(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * width_ + j) * classes_ + l;
  }

  int height_ = 0;
  int width_ = 0;
  int classes_ = 0;
  std::vector<double> data_;
};

// splitmix64. One 64-bit word of state, trivially seedable, and substreams
// can be derived per index so per-pixel generation stays deterministic under
// any parallel schedule.
struct Rng {
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1), 53 bits.
  double next_double();
  // Uniform integer in [0, n). n must be positive.
  std::size_t next_below(std::size_t n);
  // Standard normal via Box-Muller; pairs are cached.
  double next_normal();

  // Independent generator for substream `idx` of this seed.
  Rng substream(std::uint64_t idx) const;

  std::uint64_t state;

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Number of worker threads used by parallel_for. Defaults to the value of
// HSIMS_THREADS or, failing that, the hardware count.
int num_threads();
void set_num_threads(int n);
int hardware_threads();

namespace detail {
void run_chunks(std::size_t begin, std::size_t end,
                const std::function<void(std::size_t, std::size_t)>& chunk);
}

// Static row partition over [begin, end). fn(i) must write only state owned
// by index i; kernels that reduce must stay serial to keep results identical
// across thread counts.
template <typename F>
void parallel_for(std::size_t begin, std::size_t end, F&& fn) {
  detail::run_chunks(begin, end, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace hsims
