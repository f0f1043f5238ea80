#include <optional>
#include <vector>

#include "doctest.h"

#include "augtree/ordered_set.hpp"

using namespace augtree;

TEST_CASE("snapshot answers the standard query set") {
  ordered_set s{set_options{}};
  for (key_type k : {2, 5, 9}) s.insert(k);

  auto snap = s.snapshot();
  CHECK(snap.size() == 3);
  CHECK(snap.find(5));
  CHECK_FALSE(snap.find(4));
  CHECK(snap.rank(5) == 2);
  CHECK(snap.rank(1) == 0);
  CHECK(snap.rank(100) == 3);
  CHECK(snap.select(1) == 2);
  CHECK(snap.select(2) == 5);
  CHECK(snap.select(3) == 9);
  CHECK(snap.range_count(3, 9) == 2);
  CHECK(snap.range_count(0, 1) == 0);
  CHECK(snap.range_count(9, 3) == 0);
  CHECK_THROWS_AS((void)snap.select(0), std::out_of_range);
  CHECK_THROWS_AS((void)snap.select(4), std::out_of_range);
}

TEST_CASE("a snapshot is isolated from later updates") {
  ordered_set s{set_options{}};
  for (key_type k = 10; k <= 50; k += 10) s.insert(k);

  auto snap = s.snapshot();
  CHECK(snap.size() == 5);

  s.insert(35);
  s.erase(10);
  CHECK(s.size() == 5);
  CHECK(s.find(35));
  CHECK_FALSE(s.find(10));

  // the handle still answers from the moment it was taken
  CHECK(snap.size() == 5);
  CHECK_FALSE(snap.find(35));
  CHECK(snap.find(10));
  CHECK(snap.select(1) == 10);
  CHECK(snap.rank(35) == 3);
}

TEST_CASE("snapshots taken across a growth phase keep their own sizes") {
  ordered_set s{set_options{}};
  std::vector<std::optional<snapshot>> snaps;
  for (key_type k = 1; k <= 10; ++k) {
    s.insert(k * 7);
    snaps.emplace_back(s.snapshot());
  }
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    CHECK(snaps[i]->size() == i + 1);
    CHECK(snaps[i]->rank(kSentinelKey - 1) == i + 1);
  }
}

TEST_CASE("copied snapshots stay valid after the original dies") {
  ordered_set s{set_options{}};
  for (key_type k : {3, 1, 4, 1, 5, 9, 2, 6}) s.insert(k);
  std::uint64_t n = s.size();

  std::optional<snapshot> original{s.snapshot()};
  snapshot copy = *original;
  original.reset();

  s.insert(100);
  CHECK(copy.size() == n);
  CHECK_FALSE(copy.find(100));
  CHECK(copy.find(9));
}

TEST_CASE("moved-from snapshots are safely destroyed") {
  ordered_set s{set_options{}};
  s.insert(42);
  auto a = s.snapshot();
  snapshot b = std::move(a);
  CHECK(b.size() == 1);
  CHECK(b.find(42));
}

TEST_CASE("a snapshot keeps answering after its keys are erased") {
  ordered_set s{set_options{}};
  for (key_type k = 1; k <= 20; ++k) s.insert(k);
  auto snap = s.snapshot();
  for (key_type k = 1; k <= 20; ++k) s.erase(k);

  CHECK(s.size() == 0);
  CHECK(snap.size() == 20);
  CHECK(snap.range_count(1, 20) == 20);
  CHECK(snap.select(20) == 20);
}
