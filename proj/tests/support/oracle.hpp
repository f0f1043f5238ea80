#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

// Brute-force reference set: a sorted vector with the same five queries the
// tree answers. Every answer is computed by direct bisection or scan, so this
// is the independent ground truth the concurrent structure is compared
// against.

namespace testsup {

class oracle_set {
 public:
  using key_t = std::uint64_t;

  bool insert(key_t k) {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    if (it != keys_.end() && *it == k) return false;
    keys_.insert(it, k);
    return true;
  }

  bool erase(key_t k) {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    if (it == keys_.end() || *it != k) return false;
    keys_.erase(it);
    return true;
  }

  bool find(key_t k) const {
    return std::binary_search(keys_.begin(), keys_.end(), k);
  }

  // Number of keys <= k.
  std::uint64_t rank(key_t k) const {
    return std::uint64_t(
        std::upper_bound(keys_.begin(), keys_.end(), k) - keys_.begin());
  }

  std::uint64_t rank_lt(key_t k) const {
    return std::uint64_t(
        std::lower_bound(keys_.begin(), keys_.end(), k) - keys_.begin());
  }

  // 1-based; caller must check bounds, mirroring the tree's contract where
  // out-of-range throws.
  key_t select(std::uint64_t i) const { return keys_[i - 1]; }

  std::uint64_t range_count(key_t lo, key_t hi) const {
    if (lo > hi) return 0;
    return rank(hi) - rank_lt(lo);
  }

  std::uint64_t size() const { return keys_.size(); }
  const std::vector<key_t>& keys() const { return keys_; }

 private:
  std::vector<key_t> keys_;
};

}  // namespace testsup
