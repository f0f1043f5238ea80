#include <stdexcept>

#include "doctest.h"

#include "augtree/ordered_set.hpp"
#include "support/oracle.hpp"
#include "support/tree_check.hpp"
#include "workload.hpp"

using namespace augtree;

TEST_CASE("the reserved key is rejected") {
  ordered_set s{set_options{}};
  CHECK_THROWS_AS(s.insert(kSentinelKey), std::invalid_argument);
  CHECK_THROWS_AS(s.erase(kSentinelKey), std::invalid_argument);
  CHECK(s.size() == 0);
  // queries over it are fine, it just can never be a member
  CHECK_FALSE(s.find(kSentinelKey));
  CHECK(s.rank(kSentinelKey) == 0);
}

TEST_CASE("empty set answers every query") {
  ordered_set s{set_options{}};
  CHECK(s.size() == 0);
  CHECK_FALSE(s.find(7));
  CHECK(s.rank(7) == 0);
  CHECK(s.range_count(0, kSentinelKey - 1) == 0);
  CHECK_THROWS_AS((void)s.select(1), std::out_of_range);
}

TEST_CASE("select throws past either end") {
  ordered_set s{set_options{}};
  for (key_type k : {2, 5, 9}) s.insert(k);
  CHECK_THROWS_AS((void)s.select(0), std::out_of_range);
  CHECK(s.select(3) == 9);
  CHECK_THROWS_AS((void)s.select(4), std::out_of_range);
}

TEST_CASE("rank counts keys at or below the probe") {
  ordered_set s{set_options{}};
  for (key_type k : {2, 5, 9}) s.insert(k);
  CHECK(s.rank(1) == 0);
  CHECK(s.rank(2) == 1);
  CHECK(s.rank(4) == 1);
  CHECK(s.rank(5) == 2);
  CHECK(s.rank(9) == 3);
  CHECK(s.rank(kSentinelKey - 1) == 3);
}

TEST_CASE("range_count is inclusive on both ends") {
  ordered_set s{set_options{}};
  for (key_type k = 10; k <= 100; k += 10) s.insert(k);
  CHECK(s.range_count(10, 100) == 10);
  CHECK(s.range_count(0, kSentinelKey - 1) == 10);
  CHECK(s.range_count(10, 10) == 1);
  CHECK(s.range_count(11, 19) == 0);
  CHECK(s.range_count(15, 45) == 3);
  CHECK(s.range_count(45, 15) == 0);
}

TEST_CASE("insert and erase report prior membership") {
  ordered_set s{set_options{}};
  CHECK(s.insert(5));
  CHECK_FALSE(s.insert(5));
  CHECK(s.find(5));
  CHECK(s.erase(5));
  CHECK_FALSE(s.erase(5));
  CHECK_FALSE(s.find(5));
  CHECK(s.insert(5));
  CHECK(s.size() == 1);
}

TEST_CASE("every update propagates exactly once") {
  ordered_set s{set_options{}};
  for (key_type k = 0; k < 50; ++k) s.insert(k * 3);
  s.erase(3);
  s.erase(4);  // miss
  s.insert(6); // duplicate
  CHECK(s.stats().propagates.load() == 53);
}

TEST_CASE("mixed workloads stay oracle-exact in every configuration") {
  for (bool balanced : {true, false}) {
    for (propagate_mode m : {propagate_mode::direct, propagate_mode::delegated,
                             propagate_mode::eager_delegated}) {
      CAPTURE(balanced);
      CAPTURE(int(m));
      set_options o;
      o.balanced = balanced;
      o.mode = m;
      ordered_set s(o);
      testsup::oracle_set want;
      workload::rng g{balanced ? 99u : 77u};

      for (int i = 0; i < 10000; ++i) {
        key_type k = g.next_below(512);
        switch (g.next_below(8)) {
          case 0:
          case 1:
          case 2:
            CHECK(s.insert(k) == want.insert(k));
            break;
          case 3:
          case 4:
            CHECK(s.erase(k) == want.erase(k));
            break;
          case 5:
            CHECK(s.find(k) == want.find(k));
            break;
          case 6:
            CHECK(s.rank(k) == want.rank(k));
            break;
          case 7:
          default: {
            key_type lo = g.next_below(512);
            key_type hi = g.next_below(512);
            CHECK(s.range_count(lo, hi) == want.range_count(lo, hi));
            if (want.size() != 0) {
              std::uint64_t idx = 1 + g.next_below(want.size());
              CHECK(s.select(idx) == want.select(idx));
            }
            break;
          }
        }
      }

      std::string why;
      CHECK_MESSAGE(testsup::quiescent_compare(s, want, &why), why);
      CHECK(s.stats().top_cas_nil_expected.load() == 0);
      CHECK(s.stats().nil_cas_nonnil_expected.load() == 0);
    }
  }
}

TEST_CASE("options are visible on the built set") {
  set_options o;
  o.balanced = false;
  o.mode = propagate_mode::delegated;
  o.wait_spin_limit = 17;
  ordered_set s(o);
  CHECK_FALSE(s.options().balanced);
  CHECK(s.options().mode == propagate_mode::delegated);
  CHECK(s.options().wait_spin_limit == 17);
}
