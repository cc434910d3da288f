#include "hsims/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace hsims {

namespace {

// validate before sizing the buffer; a negative dimension cast to size_t
// would otherwise ask the allocator for an absurd amount first
std::size_t checked_volume(const char* who, int a, int b, int c) {
  if (a < 1 || b < 1 || c < 1)
    throw std::invalid_argument(std::string(who) + ": dimensions must be positive");
  return static_cast<std::size_t>(a) * b * c;
}

}  // namespace

HyperCube::HyperCube(int height, int width, int bands)
    : HyperCube(height, width, bands,
                std::vector<double>(checked_volume("HyperCube", height, width, bands), 0.0)) {}

HyperCube::HyperCube(int height, int width, int bands, std::vector<double> data)
    : height_(height), width_(width), bands_(bands), data_(std::move(data)) {
  if (height_ < 1 || width_ < 1 || bands_ < 1)
    throw std::invalid_argument("HyperCube: dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(height_) * width_ * bands_)
    throw std::invalid_argument("HyperCube: data size does not match dimensions");
}

void HyperCube::check_pixel(int i, int j) const {
  if (i < 0 || i >= height_ || j < 0 || j >= width_)
    throw std::out_of_range("HyperCube: pixel index out of range");
}

std::span<const double> HyperCube::spectrum(int i, int j) const {
  check_pixel(i, j);
  return {data_.data() + flat(i, j, 0), static_cast<std::size_t>(bands_)};
}

std::span<double> HyperCube::spectrum(int i, int j) {
  check_pixel(i, j);
  return {data_.data() + flat(i, j, 0), static_cast<std::size_t>(bands_)};
}

std::span<const double> HyperCube::spectrum(std::size_t pixel) const {
  if (pixel >= pixels()) throw std::out_of_range("HyperCube: pixel index out of range");
  return {data_.data() + pixel * bands_, static_cast<std::size_t>(bands_)};
}

bool HyperCube::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

LabelField::LabelField(int height, int width, int classes)
    : LabelField(height, width, classes,
                 std::vector<double>(checked_volume("LabelField", height, width, classes), 0.0)) {}

LabelField::LabelField(int height, int width, int classes, std::vector<double> data)
    : height_(height), width_(width), classes_(classes), data_(std::move(data)) {
  if (height_ < 1 || width_ < 1 || classes_ < 1)
    throw std::invalid_argument("LabelField: dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(height_) * width_ * classes_)
    throw std::invalid_argument("LabelField: data size does not match dimensions");
}

double LabelField::simplex_violation() const {
  double worst = 0.0;
  for (std::size_t px = 0; px < pixels(); ++px) {
    double sum = 0.0;
    for (int l = 0; l < classes_; ++l) {
      double v = data_[px * classes_ + l];
      if (v < 0.0) worst = std::max(worst, -v);
      sum += v;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

bool LabelField::is_one_hot() const {
  for (std::size_t px = 0; px < pixels(); ++px) {
    int ones = 0;
    for (int l = 0; l < classes_; ++l) {
      double v = data_[px * classes_ + l];
      if (v == 1.0)
        ++ones;
      else if (v != 0.0)
        return false;
    }
    if (ones != 1) return false;
  }
  return true;
}

int LabelField::argmax_class(std::size_t px) const {
  const double* row = data_.data() + px * classes_;
  int best = 0;
  for (int l = 1; l < classes_; ++l)
    if (row[l] > row[best]) best = l;
  return best;
}

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() {
  state += 0x9E3779B97F4A7C15ull;
  return mix64(state);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::next_below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
  // Fixed-point multiply keeps the draw branch-free and reproducible.
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double Rng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 1.0 - next_double();  // (0, 1], keeps the log finite
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Rng Rng::substream(std::uint64_t idx) const {
  return Rng(mix64(state + 0x9E3779B97F4A7C15ull) ^
             mix64(idx + 0x632BE59BD9B4E019ull));
}

namespace {

std::atomic<int> g_threads{0};

int env_threads() {
  const char* s = std::getenv("HSIMS_THREADS");
  if (!s || !*s) return 0;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || v < 1) return 0;
  return static_cast<int>(v);
}

}  // namespace

int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

int num_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
  int e = env_threads();
  return e > 0 ? e : hardware_threads();
}

void set_num_threads(int n) {
  g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

namespace detail {

void run_chunks(std::size_t begin, std::size_t end,
                const std::function<void(std::size_t, std::size_t)>& chunk) {
  if (begin >= end) return;
  std::size_t n = end - begin;
  int threads = num_threads();
  if (threads <= 1 || n < 2) {
    chunk(begin, end);
    return;
  }
  std::size_t workers = std::min<std::size_t>(threads, n);
  std::size_t per = n / workers;
  std::size_t extra = n % workers;
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  std::size_t at = begin;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t len = per + (w < extra ? 1 : 0);
    std::size_t b = at, e = at + len;
    at = e;
    if (w + 1 == workers)
      chunk(b, e);
    else
      pool.emplace_back([&chunk, b, e] { chunk(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    double t = a[c] - b[c];
    s += t * t;
  }
  return s;
}

}  // namespace hsims
