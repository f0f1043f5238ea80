#include <cstdint>
#include <map>

#include "doctest.h"
#include "workload.hpp"

using namespace workload;

TEST_CASE("mix strings parse strictly") {
  op_mix m;
  REQUIRE(parse_mix("50:30:10:10", m));
  CHECK(m.insert_pct == 50);
  CHECK(m.erase_pct == 30);
  CHECK(m.find_pct == 10);
  CHECK(m.query_pct == 10);
  CHECK(m.valid());

  REQUIRE(parse_mix("100:0:0:0", m));
  CHECK(m.insert_pct == 100);
  REQUIRE(parse_mix("0:0:0:100", m));
  CHECK(m.query_pct == 100);

  // well-formed text parses; the sum rule is valid()'s job
  REQUIRE(parse_mix("50:30:10:11", m));
  CHECK_FALSE(m.valid());

  CHECK_FALSE(parse_mix("50:30:20", m));
  CHECK_FALSE(parse_mix("50:30:10:10:0", m));
  CHECK_FALSE(parse_mix("a:b:c:d", m));
  CHECK_FALSE(parse_mix("", m));
  CHECK_FALSE(parse_mix("25:25:25:25 ", m));
  CHECK_FALSE(parse_mix("-5:55:25:25", m));
}

TEST_CASE("distribution strings parse with optional zipf skew") {
  dist_kind d;
  double theta = 0.0;
  REQUIRE(parse_dist("uniform", d, theta));
  CHECK(d == dist_kind::uniform);
  REQUIRE(parse_dist("sorted", d, theta));
  CHECK(d == dist_kind::sorted);
  REQUIRE(parse_dist("zipf", d, theta));
  CHECK(d == dist_kind::zipf);
  CHECK(theta == doctest::Approx(0.95));
  REQUIRE(parse_dist("zipf:0.99", d, theta));
  CHECK(theta == doctest::Approx(0.99));
  REQUIRE(parse_dist("zipf:1.2", d, theta));
  CHECK(theta == doctest::Approx(1.2));

  CHECK_FALSE(parse_dist("zipf:", d, theta));
  CHECK_FALSE(parse_dist("zipf:0", d, theta));
  CHECK_FALSE(parse_dist("zipf:-1", d, theta));
  CHECK_FALSE(parse_dist("zipf:abc", d, theta));
  CHECK_FALSE(parse_dist("pareto", d, theta));
  CHECK_FALSE(parse_dist("", d, theta));
}

TEST_CASE("op draws follow the mix proportions") {
  op_mix m;
  REQUIRE(parse_mix("10:20:30:40", m));
  rng g{9};
  int counts[4] = {0, 0, 0, 0};
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[int(draw_op(g, m))] += 1;
  CHECK(counts[0] > n / 10 * 8 / 10);
  CHECK(counts[0] < n / 10 * 12 / 10);
  CHECK(counts[3] > n * 4 / 10 * 9 / 10);
  CHECK(counts[3] < n * 4 / 10 * 11 / 10);
  CHECK(counts[0] + counts[1] + counts[2] + counts[3] == n);

  REQUIRE(parse_mix("0:0:100:0", m));
  for (int i = 0; i < 1000; ++i) CHECK(draw_op(g, m) == op_kind::find);
}

TEST_CASE("next_below stays in range and covers the range") {
  rng g{77};
  bool seen[10] = {};
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t v = g.next_below(10);
    REQUIRE(v < 10);
    seen[v] = true;
  }
  for (bool b : seen) CHECK(b);
}

TEST_CASE("zipf sampling is skewed toward the head") {
  zipf_table z(1000, 0.95);
  CHECK(z.size() == 1000);
  rng g{31337};
  std::map<std::uint64_t, int> hist;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    std::uint64_t k = z.sample(g);
    REQUIRE(k < 1000);
    hist[k] += 1;
  }
  CHECK(hist[0] > hist[100] * 5);
  CHECK(hist[0] > n / 100);
}

TEST_CASE("sorted streams hand out ascending batches of one hundred") {
  sorted_source src;
  rng g{1};
  key_stream a(dist_kind::sorted, 0, g, nullptr, &src);
  for (std::uint64_t i = 0; i < 250; ++i) CHECK(a.next_key() == i);

  // a second stream picks up at the next batch boundary
  key_stream b(dist_kind::sorted, 0, g, nullptr, &src);
  CHECK(b.next_key() == 300);
  CHECK(a.next_key() == 250);
  CHECK(b.next_key() == 301);
}

TEST_CASE("streams are fully determined by seed, trial, and thread") {
  auto fingerprint = [](std::uint64_t seed, std::uint32_t trial,
                        std::uint32_t thread) {
    rng g{stream_seed(seed, trial, thread)};
    key_stream ks(dist_kind::uniform, 100000, g);
    op_mix m;
    parse_mix("40:30:20:10", m);
    std::uint64_t h = 0;
    for (int i = 0; i < 5000; ++i) {
      op_kind op = draw_op(ks.generator(), m);
      h = hash_step(h, std::uint64_t(op), ks.next_key());
    }
    return h;
  };

  CHECK(fingerprint(1, 0, 0) == fingerprint(1, 0, 0));
  CHECK(fingerprint(1, 0, 0) != fingerprint(1, 0, 1));
  CHECK(fingerprint(1, 0, 0) != fingerprint(1, 1, 0));
  CHECK(fingerprint(1, 0, 0) != fingerprint(2, 0, 0));
}

TEST_CASE("csv cells format floats to six significant digits") {
  CHECK(format_sig6(0.5) == "0.5");
  CHECK(format_sig6(0.0) == "0");
  CHECK(format_sig6(1.0 / 3.0) == "0.333333");
  CHECK(format_sig6(1234567.0) == "1.23457e+06");
  CHECK(format_sig6(42.0) == "42");
}

TEST_CASE("csv rows join with bare commas") {
  CHECK(csv_join({"a", "b", "c"}) == "a,b,c");
  CHECK(csv_join({"x"}) == "x");
  CHECK(csv_join({}) == "");
}
