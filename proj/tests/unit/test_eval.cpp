#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "hsims/core.hpp"
#include "hsims/eval.hpp"

using namespace hsims;
using eval::Scores;

namespace {

std::vector<std::uint16_t> u16(std::initializer_list<int> v) {
  std::vector<std::uint16_t> out;
  for (int x : v) out.push_back(static_cast<std::uint16_t>(x));
  return out;
}

std::int64_t best_diagonal_bruteforce(const std::vector<std::int64_t>& conf, int k) {
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::int64_t best = -1;
  do {
    std::int64_t d = 0;
    for (int j = 0; j < k; ++j) d += conf[static_cast<std::size_t>(perm[j]) * k + j];
    best = std::max(best, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("confusion_matrix counts and skips unlabeled reference pixels") {
  auto pred = u16({1, 1, 2, 2, 1, 2});
  auto ref = u16({1, 1, 1, 2, 0, 2});  // fifth pixel unlabeled
  auto conf = eval::confusion_matrix(pred, ref, 2);
  REQUIRE(conf.size() == 4);
  CHECK(conf[0] == 2);  // ref 1 pred 1
  CHECK(conf[1] == 1);  // ref 1 pred 2
  CHECK(conf[2] == 0);
  CHECK(conf[3] == 2);
}

TEST_CASE("confusion_matrix rejects malformed input") {
  auto pred = u16({1, 2});
  auto ref = u16({1});
  CHECK_THROWS_AS(eval::confusion_matrix(pred, ref, 2), std::invalid_argument);

  auto ref3 = u16({1, 3});
  CHECK_THROWS_AS(eval::confusion_matrix(pred, ref3, 2), std::invalid_argument);

  auto pred0 = u16({0, 2});
  auto ref2 = u16({1, 2});
  CHECK_THROWS_AS(eval::confusion_matrix(pred0, ref2, 2), std::invalid_argument);

  auto predbig = u16({1, 5});
  CHECK_THROWS_AS(eval::confusion_matrix(predbig, ref2, 2), std::invalid_argument);
}

TEST_CASE("worked 2x2 example") {
  // identity matching is optimal here
  std::vector<std::int64_t> conf = {40, 10, 20, 30};
  auto perm = eval::hungarian_match(conf, 2);
  REQUIRE(perm.size() == 2);
  CHECK(perm[0] == 0);
  CHECK(perm[1] == 1);
  Scores s = eval::scores(conf, 2, perm);
  CHECK(s.oa == doctest::Approx(0.7));
  CHECK(s.aa == doctest::Approx(0.5 * (40.0 / 50.0 + 30.0 / 50.0)));
  // pe = (50*60 + 50*40) / 100^2 = 0.5, kappa = (0.7 - 0.5) / 0.5
  CHECK(s.kappa == doctest::Approx(0.4));
}

TEST_CASE("matching fixes permuted predictions perfectly") {
  // predictions are the reference relabeled by a 3-cycle
  auto ref = u16({1, 1, 2, 2, 3, 3, 1, 2, 3});
  std::vector<std::uint16_t> pred(ref.size());
  const int cycle[] = {0, 2, 3, 1};  // class c -> cycle[c]
  for (std::size_t i = 0; i < ref.size(); ++i)
    pred[i] = static_cast<std::uint16_t>(cycle[ref[i]]);
  Scores s = eval::evaluate(pred, ref, 3);
  CHECK(s.oa == 1.0);
  CHECK(s.aa == 1.0);
  CHECK(s.kappa == 1.0);
}

TEST_CASE("hungarian_match equals exhaustive search on random matrices") {
  Rng r(414);
  for (int k = 2; k <= 5; ++k)
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<std::int64_t> conf(static_cast<std::size_t>(k) * k);
      for (auto& c : conf) c = static_cast<std::int64_t>(r.next_below(50));
      auto perm = eval::hungarian_match(conf, k);
      std::vector<char> hit(k, 0);
      std::int64_t diag = 0;
      for (int j = 0; j < k; ++j) {
        REQUIRE(perm[j] >= 0);
        REQUIRE(perm[j] < k);
        CHECK(!hit[perm[j]]);
        hit[perm[j]] = 1;
        diag += conf[static_cast<std::size_t>(perm[j]) * k + j];
      }
      CHECK(diag == best_diagonal_bruteforce(conf, k));
    }
}

TEST_CASE("scores are invariant under relabeling the prediction") {
  Rng r(99);
  std::vector<std::uint16_t> ref(300), pred(300);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref[i] = static_cast<std::uint16_t>(1 + r.next_below(4));
    pred[i] = static_cast<std::uint16_t>(
        r.next_double() < 0.8 ? ref[i] : 1 + r.next_below(4));
  }
  Scores base = eval::evaluate(pred, ref, 4);

  const int shuffle[] = {0, 3, 1, 4, 2};
  std::vector<std::uint16_t> relabeled(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    relabeled[i] = static_cast<std::uint16_t>(shuffle[pred[i]]);
  Scores moved = eval::evaluate(relabeled, ref, 4);
  CHECK(moved.oa == doctest::Approx(base.oa).epsilon(1e-12));
  CHECK(moved.aa == doctest::Approx(base.aa).epsilon(1e-12));
  CHECK(moved.kappa == doctest::Approx(base.kappa).epsilon(1e-12));
}

TEST_CASE("aa averages only over classes present in the reference") {
  // class 2 never appears in the reference
  auto ref = u16({1, 1, 3, 3});
  auto pred = u16({1, 1, 3, 1});
  Scores s = eval::evaluate(pred, ref, 3);
  CHECK(s.oa == doctest::Approx(0.75));
  CHECK(s.aa == doctest::Approx(0.5 * (1.0 + 0.5)));
}

TEST_CASE("kappa edge case when chance agreement is total") {
  // single class: pe = 1, agreement perfect -> kappa 1
  auto ref = u16({1, 1, 1});
  auto pred = u16({1, 1, 1});
  Scores s = eval::evaluate(pred, ref, 1);
  CHECK(s.oa == 1.0);
  CHECK(s.kappa == 1.0);

  // single reference class, imperfect prediction -> kappa 0
  auto ref2 = u16({1, 1, 1, 1});
  auto pred2 = u16({1, 1, 1, 2});
  Scores s2 = eval::evaluate(pred2, ref2, 2);
  CHECK(s2.oa == doctest::Approx(0.75));
  CHECK(s2.kappa == 0.0);
}

TEST_CASE("scores validates the permutation and the totals") {
  std::vector<std::int64_t> conf = {1, 0, 0, 1};
  CHECK_THROWS_AS(eval::scores(conf, 2, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(eval::scores(conf, 2, {0}), std::invalid_argument);
  CHECK_THROWS_AS(eval::scores(conf, 2, {0, 2}), std::invalid_argument);

  std::vector<std::int64_t> empty = {0, 0, 0, 0};
  CHECK_THROWS_AS(eval::scores(empty, 2, {0, 1}), DegenerateInputError);

  std::vector<std::int64_t> neg = {1, -1, 0, 1};
  CHECK_THROWS_AS(eval::hungarian_match(neg, 2), std::invalid_argument);
}

TEST_CASE("evaluate handles an all-unlabeled reference") {
  auto ref = u16({0, 0});
  auto pred = u16({1, 2});
  CHECK_THROWS_AS(eval::evaluate(pred, ref, 2), DegenerateInputError);
}
