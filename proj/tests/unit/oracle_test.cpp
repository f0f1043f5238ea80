#include <array>
#include <bit>
#include <cstdint>

#include "doctest.h"
#include "support/oracle.hpp"
#include "workload.hpp"

namespace {

// Dense mirror over a small universe; every query is answered by popcounts,
// so it shares no code with the sorted-vector oracle it cross-checks.
struct bit_mirror {
  static constexpr std::uint64_t kUniverse = 512;
  std::array<std::uint64_t, kUniverse / 64> w{};

  static std::uint64_t wi(std::uint64_t k) { return k / 64; }
  static std::uint64_t bit(std::uint64_t k) { return 1ull << (k % 64); }

  bool insert(std::uint64_t k) {
    bool had = (w[wi(k)] & bit(k)) != 0;
    w[wi(k)] |= bit(k);
    return !had;
  }
  bool erase(std::uint64_t k) {
    bool had = (w[wi(k)] & bit(k)) != 0;
    w[wi(k)] &= ~bit(k);
    return had;
  }
  bool find(std::uint64_t k) const { return (w[wi(k)] & bit(k)) != 0; }

  std::uint64_t size() const {
    std::uint64_t n = 0;
    for (std::uint64_t x : w) n += std::uint64_t(std::popcount(x));
    return n;
  }

  // keys <= k
  std::uint64_t rank(std::uint64_t k) const {
    if (k >= kUniverse) return size();
    std::uint64_t n = 0;
    for (std::uint64_t i = 0; i < wi(k); ++i)
      n += std::uint64_t(std::popcount(w[i]));
    std::uint64_t rem = k % 64;
    std::uint64_t mask = rem == 63 ? ~0ull : ((1ull << (rem + 1)) - 1);
    n += std::uint64_t(std::popcount(w[wi(k)] & mask));
    return n;
  }

  std::uint64_t range_count(std::uint64_t lo, std::uint64_t hi) const {
    if (lo > hi) return 0;
    return rank(hi) - (lo == 0 ? 0 : rank(lo - 1));
  }

  // i-th smallest, 1-based; caller guarantees i <= size()
  std::uint64_t select(std::uint64_t i) const {
    for (std::uint64_t word = 0; word < w.size(); ++word) {
      std::uint64_t c = std::uint64_t(std::popcount(w[word]));
      if (i > c) {
        i -= c;
        continue;
      }
      std::uint64_t x = w[word];
      for (std::uint64_t b = 0; b < 64; ++b) {
        if (x & (1ull << b)) {
          if (--i == 0) return word * 64 + b;
        }
      }
    }
    return ~0ull;
  }
};

}  // namespace

TEST_CASE("oracle basic membership and duplicates") {
  testsup::oracle_set o;
  CHECK(o.insert(2));
  CHECK(o.insert(9));
  CHECK(o.insert(5));
  CHECK_FALSE(o.insert(5));
  CHECK(o.size() == 3);
  CHECK(o.find(5));
  CHECK_FALSE(o.find(4));
  CHECK(o.erase(5));
  CHECK_FALSE(o.erase(5));
  CHECK_FALSE(o.find(5));
  CHECK(o.size() == 2);
}

TEST_CASE("oracle order statistics on a three-key set") {
  testsup::oracle_set o;
  o.insert(2);
  o.insert(5);
  o.insert(9);
  CHECK(o.rank(5) == 2);
  CHECK(o.rank(1) == 0);
  CHECK(o.rank(2) == 1);
  CHECK(o.rank(4) == 1);
  CHECK(o.rank(9) == 3);
  CHECK(o.rank(100) == 3);
  CHECK(o.range_count(3, 9) == 2);
  CHECK(o.range_count(2, 9) == 3);
  CHECK(o.range_count(2, 2) == 1);
  CHECK(o.range_count(3, 4) == 0);
  CHECK(o.range_count(9, 3) == 0);
  CHECK(o.select(1) == 2);
  CHECK(o.select(2) == 5);
  CHECK(o.select(3) == 9);
}

TEST_CASE("oracle agrees with a dense bit mirror over a million ops") {
  testsup::oracle_set o;
  bit_mirror b;
  workload::rng g{0x5eedu};
  std::uint64_t mismatches = 0;
  for (int i = 0; i < 1000000; ++i) {
    std::uint64_t k = g.next_below(bit_mirror::kUniverse);
    switch (g.next_below(6)) {
      case 0:
        if (o.insert(k) != b.insert(k)) ++mismatches;
        break;
      case 1:
        if (o.erase(k) != b.erase(k)) ++mismatches;
        break;
      case 2:
        if (o.find(k) != b.find(k)) ++mismatches;
        break;
      case 3:
        if (o.rank(k) != b.rank(k)) ++mismatches;
        break;
      case 4: {
        std::uint64_t lo = g.next_below(bit_mirror::kUniverse);
        std::uint64_t hi = g.next_below(bit_mirror::kUniverse);
        if (o.range_count(lo, hi) != b.range_count(lo, hi)) ++mismatches;
        break;
      }
      case 5:
      default:
        if (o.size() != b.size()) ++mismatches;
        if (o.size() != 0) {
          std::uint64_t idx = 1 + g.next_below(o.size());
          if (o.select(idx) != b.select(idx)) ++mismatches;
        }
        break;
    }
  }
  REQUIRE(mismatches == 0);
  REQUIRE(o.size() == b.size());
}
