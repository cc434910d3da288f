#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>
#include <vector>

#include "doctest.h"
#include "hsims/core.hpp"

using namespace hsims;

TEST_CASE("HyperCube layout and accessors") {
  HyperCube c(2, 3, 4);
  CHECK(c.height() == 2);
  CHECK(c.width() == 3);
  CHECK(c.bands() == 4);
  CHECK(c.pixels() == 6);
  CHECK(c.size() == 24);

  c.at(1, 2, 3) = 7.5;
  CHECK(c.data()[((1 * 3) + 2) * 4 + 3] == 7.5);

  auto s = c.spectrum(1, 2);
  CHECK(s.size() == 4);
  CHECK(s[3] == 7.5);
  CHECK(c.spectrum(std::size_t{5})[3] == 7.5);
}

TEST_CASE("HyperCube validation") {
  CHECK_THROWS_AS(HyperCube(0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(HyperCube(1, -1, 1), std::invalid_argument);
  CHECK_THROWS_AS(HyperCube(1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(HyperCube(2, 2, 1, std::vector<double>(3)), std::invalid_argument);
  HyperCube c(2, 2, 1);
  CHECK_THROWS_AS(c.spectrum(2, 0), std::out_of_range);
  CHECK_THROWS_AS(c.spectrum(0, 2), std::out_of_range);
  CHECK_THROWS_AS(c.spectrum(std::size_t{4}), std::out_of_range);
}

TEST_CASE("HyperCube all_finite") {
  HyperCube c(1, 2, 1, {1.0, 2.0});
  CHECK(c.all_finite());
  c.at(0, 1, 0) = std::nan("");
  CHECK_FALSE(c.all_finite());
  c.at(0, 1, 0) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(c.all_finite());
}

TEST_CASE("LabelField simplex checks and argmax ties") {
  LabelField u(1, 2, 3, {0.2, 0.3, 0.5, 1.0, 0.0, 0.0});
  CHECK(u.simplex_violation() == doctest::Approx(0.0));
  CHECK_FALSE(u.is_one_hot());

  LabelField onehot(1, 1, 3, {0.0, 1.0, 0.0});
  CHECK(onehot.is_one_hot());

  // negative mass and row-sum drift both count as violation
  LabelField bad(1, 1, 2, {-0.25, 1.25});
  CHECK(bad.simplex_violation() == doctest::Approx(0.25));
  LabelField drift(1, 1, 2, {0.75, 0.75});
  CHECK(drift.simplex_violation() == doctest::Approx(0.5));

  // exact tie resolves to the smallest class index
  LabelField tie(1, 1, 3, {0.5, 0.5, 0.0});
  CHECK(tie.argmax_class(0) == 0);
  LabelField tie2(1, 1, 3, {0.1, 0.45, 0.45});
  CHECK(tie2.argmax_class(0) == 1);
}

TEST_CASE("Rng determinism and ranges") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
  for (int i = 0; i < 1000; ++i) CHECK(r.next_below(13) < 13);
  CHECK_THROWS_AS(r.next_below(0), std::invalid_argument);
}

TEST_CASE("Rng substreams differ and are stable") {
  Rng root(99);
  Rng s0 = root.substream(0);
  Rng s1 = root.substream(1);
  CHECK(s0.next_u64() != s1.next_u64());
  // substream derivation does not perturb the parent
  Rng root2(99);
  CHECK(root.next_u64() == root2.next_u64());
  // re-deriving gives the same stream
  Rng s1b = Rng(99).substream(1);
  Rng s1c = Rng(99).substream(1);
  for (int i = 0; i < 10; ++i) CHECK(s1b.next_u64() == s1c.next_u64());
}

TEST_CASE("Rng normal moments") {
  Rng r(1234);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.next_normal();
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("squared_distance") {
  std::vector<double> a{1.0, 2.0, 3.0}, b{2.0, 0.0, 3.0};
  CHECK(squared_distance({a.data(), 3}, {b.data(), 3}) == doctest::Approx(5.0));
  CHECK(squared_distance({a.data(), 3}, {a.data(), 3}) == 0.0);
}

TEST_CASE("parallel_for covers the range once per index") {
  set_num_threads(4);
  std::vector<int> hits(1003, 0);
  parallel_for(0, hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  set_num_threads(0);  // back to default resolution
}

TEST_CASE("thread count resolution") {
  set_num_threads(3);
  CHECK(num_threads() == 3);
  set_num_threads(0);
  CHECK(num_threads() >= 1);
}
