#include <doctest.h>

#include <vector>

#include "csbp/errors.hpp"
#include "csbp/partition.hpp"
#include "csbp/rng.hpp"

using namespace csbp;
using P = ConsecutivePartition;

namespace {

P random_partition(std::uint64_t n, Rng& rng) {
  std::vector<P::Size> sizes;
  std::uint64_t left = n;
  while (left > 0) {
    auto s = std::min<std::uint64_t>(left, 1 + rng.geometric(0.5));
    sizes.push_back(s);
    left -= s;
  }
  return P(sizes);
}

// sup{n : restrictions to [n] agree}, by comparing block labels element by element
double brute_distance(const P& a, const P& b) {
  auto labels = [](const P& p) {
    std::vector<std::size_t> l;
    for (std::size_t i = 0; i < p.sizes().size(); ++i) l.insert(l.end(), p.sizes()[i], i);
    return l;
  };
  auto la = labels(a), lb = labels(b);
  for (std::size_t n = 1; n <= la.size(); ++n) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if ((la[i] == la[j]) != (lb[i] == lb[j])) return n == 1 ? 1.0 : 1.0 / double(n - 1);
  }
  return 0.0;
}

}  // namespace

TEST_SUITE("partition") {
  TEST_CASE("text rendering round-trips") {
    P c({2, 1, 3});
    CHECK(c.to_string() == "[2,1,3]");
    CHECK(P::parse("[2,1,3]") == c);
    P inf({2}, true);
    CHECK(inf.to_string() == "[2,inf]");
    CHECK(P::parse("[2,inf]") == inf);
    CHECK(P::parse("[inf]").block_count() == 1);
    CHECK_THROWS(P::parse("[2,0]"));
    CHECK_THROWS(P::parse("2,1"));
  }

  TEST_CASE("block access is 1-based") {
    P c({2, 1}, true);
    CHECK(c.block_size(1) == 2);
    CHECK(c.block_size(2) == 1);
    CHECK(c.block_size(3) == 0);
    CHECK_THROWS_AS(c.block_size(4), RangeError);
    CHECK_THROWS_AS(c.block_size(0), RangeError);
  }

  TEST_CASE("coag with the trivial partitions") {
    P c({2, 1, 3});
    CHECK(coag(c, P::singletons(3)) == c);
    CHECK(coag(c, P({3})) == P({6}));
  }

  TEST_CASE("coag by hand") { CHECK(coag(P({2, 1, 3}), P({2, 1})) == P({3, 3})); }

  TEST_CASE("coag is associative") {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
      auto a = random_partition(30, rng);
      auto b = random_partition(a.block_count(), rng);
      auto c = random_partition(b.block_count(), rng);
      CHECK(coag(coag(a, b), c) == coag(a, coag(b, c)));
    }
  }

  TEST_CASE("restriction") {
    CHECK(restrict_to(P({2, 1, 3}), 4) == P({2, 1, 1}));
    CHECK(restrict_to(P({2, 1, 3}), 6) == P({2, 1, 3}));
    CHECK(restrict_to(P({5}), 2) == P({2}));
    CHECK(restrict_to(P({2}, true), 5) == P({2, 3}));
  }

  TEST_CASE("restriction commutes with coag on blocks") {
    Rng rng(12);
    for (int rep = 0; rep < 200; ++rep) {
      auto a = random_partition(25, rng);
      auto d = random_partition(a.block_count(), rng);
      auto whole = coag(a, d);
      auto k = 1 + rng.geometric(0.1) % 25;
      auto lhs = restrict_to(whole, k);
      auto ra = restrict_to(a, k);
      auto rd = restrict_to(d, ra.block_count());
      CHECK(lhs == coag(ra, rd));
    }
  }

  TEST_CASE("distance") {
    CHECK(distance(P({2, 1, 3}), P({2, 1, 3})) == 0.0);
    CHECK(distance(P({1}, true), P({2}, true)) == doctest::Approx(1.0));
    // [2,2] and [2,1,1] agree on [3] and differ on [4]
    CHECK(distance(P({2, 2}), P({2, 1, 1})) == doctest::Approx(1.0 / 3.0));
    CHECK(distance(P({2, 2}), P({2, 1, 1})) == doctest::Approx(brute_distance(P({2, 2}), P({2, 1, 1}))));
  }

  TEST_CASE("distance matches the brute definition") {
    Rng rng(13);
    for (int rep = 0; rep < 300; ++rep) {
      auto a = random_partition(12, rng);
      auto b = random_partition(12, rng);
      CHECK(distance(a, b) == doctest::Approx(brute_distance(a, b)));
    }
  }

  TEST_CASE("merge events") {
    CHECK(apply_merge(P({1, 1, 1, 1}), MergeEvent{2, 2, false}) == P({1, 2, 1}));
    CHECK(apply_merge(P({1, 1, 1, 1}), MergeEvent{2, 0, true}) == P({1, 3}));
    CHECK_THROWS(apply_merge(P({1, 1}), MergeEvent{2, 2, false}));
  }

  TEST_CASE("merge events agree with coag") {
    Rng rng(14);
    for (int rep = 0; rep < 1000; ++rep) {
      auto c = random_partition(20, rng);
      const auto m = c.block_count();
      if (m < 2) continue;
      bool boundary = rng.uniform() < 0.3;
      std::uint64_t j, k = 0;
      if (boundary) {
        j = 1 + std::uint64_t(rng.uniform() * double(m - 1));
      } else {
        k = 2 + std::uint64_t(rng.uniform() * double(m - 1));
        k = std::min<std::uint64_t>(k, m);
        j = 1 + std::uint64_t(rng.uniform() * double(m - k + 1));
        if (j + k - 1 > m) j = m - k + 1;
      }
      MergeEvent e{j, k, boundary};
      CHECK(apply_merge(c, e) == coag(c, merge_pattern(m, e)));
    }
  }
}
