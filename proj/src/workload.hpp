#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

// Operation and key stream generation for the benchmark harness, plus the
// small formatting helpers the CSV emitter needs. Everything here is
// deterministic in (seed, trial, thread) and independent of the tree itself.

namespace workload {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct rng {
  std::uint64_t state = 0;

  std::uint64_t next() { return splitmix64(state); }

  // Uniform in [0, n), n > 0. Rejection keeps it unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t threshold = -n % n;
    for (;;) {
      std::uint64_t v = next();
      if (v >= threshold) return v % n;
    }
  }

  double next_unit() {
    return double(next() >> 11) * 0x1.0p-53;
  }
};

// Decorrelated stream seed per (seed, trial, thread): each component is
// passed through the mixer so neighboring ids do not produce related states.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint32_t trial,
                                 std::uint32_t thread) {
  std::uint64_t s = seed;
  splitmix64(s);
  s ^= 0x100000001ull * trial + 0x51700e1ull;
  splitmix64(s);
  s ^= 0x200000003ull * thread + 0xd15ea5eull;
  splitmix64(s);
  return s;
}

enum class op_kind : std::uint8_t { insert, erase, find, query };
enum class query_kind : std::uint8_t { range_count, rank, select };
enum class dist_kind : std::uint8_t { uniform, zipf, sorted };

struct op_mix {
  int insert_pct = 25;
  int erase_pct = 25;
  int find_pct = 25;
  int query_pct = 25;

  bool valid() const {
    return insert_pct >= 0 && erase_pct >= 0 && find_pct >= 0 &&
           query_pct >= 0 &&
           insert_pct + erase_pct + find_pct + query_pct == 100;
  }
};

// Parses "i:d:f:q" percentages. Returns false on malformed text; the caller
// still has to check valid() for the sum rule.
bool parse_mix(const std::string& text, op_mix& out);

// Parses "uniform", "sorted", "zipf" or "zipf:<theta>". Theta defaults to
// 0.95 when not spelled out.
bool parse_dist(const std::string& text, dist_kind& out, double& theta);

inline op_kind draw_op(rng& r, const op_mix& m) {
  std::uint64_t roll = r.next_below(100);
  if (roll < std::uint64_t(m.insert_pct)) return op_kind::insert;
  roll -= m.insert_pct;
  if (roll < std::uint64_t(m.erase_pct)) return op_kind::erase;
  roll -= m.erase_pct;
  if (roll < std::uint64_t(m.find_pct)) return op_kind::find;
  return op_kind::query;
}

// Zipf over ranks [0, n): cumulative mass table built once per (n, theta),
// sampled by binary search on a uniform draw.
class zipf_table {
 public:
  zipf_table(std::uint64_t n, double theta);

  std::uint64_t size() const { return cum_.size(); }
  double theta() const { return theta_; }
  std::uint64_t sample(rng& r) const;

 private:
  std::vector<double> cum_;
  double theta_;
};

// Shared ascending key counter for the sorted distribution. Threads grab
// batches of kBatch keys at a time.
struct sorted_source {
  static constexpr std::uint64_t kBatch = 100;
  std::atomic<std::uint64_t> next{0};
};

class key_stream {
 public:
  key_stream(dist_kind dist, std::uint64_t max_key, rng r,
             const zipf_table* zipf = nullptr, sorted_source* sorted = nullptr)
      : dist_(dist), max_key_(max_key), rng_(r), zipf_(zipf),
        sorted_(sorted) {}

  std::uint64_t next_key() {
    switch (dist_) {
      case dist_kind::uniform:
        return rng_.next_below(max_key_);
      case dist_kind::zipf:
        return zipf_->sample(rng_);
      case dist_kind::sorted:
      default:
        if (batch_next_ == batch_end_) {
          batch_next_ =
              sorted_->next.fetch_add(sorted_source::kBatch,
                                      std::memory_order_relaxed);
          batch_end_ = batch_next_ + sorted_source::kBatch;
        }
        return batch_next_++;
    }
  }

  rng& generator() { return rng_; }

 private:
  dist_kind dist_;
  std::uint64_t max_key_;
  rng rng_;
  const zipf_table* zipf_;
  sorted_source* sorted_;
  std::uint64_t batch_next_ = 0;
  std::uint64_t batch_end_ = 0;
};

// Running fingerprint of an operation stream, for reproducibility checks.
inline std::uint64_t hash_step(std::uint64_t h, std::uint64_t op,
                               std::uint64_t key) {
  std::uint64_t s = h ^ (op + 0x9e3779b97f4a7c15ull) ^ (key << 1);
  return splitmix64(s);
}

// Floating-point cell with 6 significant digits.
std::string format_sig6(double v);

std::string csv_join(const std::vector<std::string>& cells);

}  // namespace workload
