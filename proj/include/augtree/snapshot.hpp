#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "augtree/common.hpp"
#include "augtree/epoch.hpp"
#include "augtree/stats.hpp"
#include "augtree/version.hpp"

namespace augtree {

// Order-statistic queries over one immutable version tree. The functions are
// free of shared state; callers are responsible for keeping the versions
// alive (an operation guard for one-shot queries, a pin for snapshots).
namespace vq {

inline bool is_leaf(const version* v) { return v->left == nullptr; }

inline bool find(const version* v, key_type k) {
  if (k == kSentinelKey) return false;
  while (!is_leaf(v)) {
    AUGTREE_CHECK_TAG(v, kTagVersion);
    v = k < v->key ? v->left : v->right;
  }
  AUGTREE_CHECK_TAG(v, kTagVersion);
  return v->key == k;
}

// Number of keys <= k.
inline std::uint64_t rank_le(const version* v, key_type k) {
  std::uint64_t acc = 0;
  while (!is_leaf(v)) {
    AUGTREE_CHECK_TAG(v, kTagVersion);
    if (k < v->key) {
      v = v->left;
    } else {
      acc += v->left->size;
      v = v->right;
    }
  }
  AUGTREE_CHECK_TAG(v, kTagVersion);
  if (v->key <= k) acc += v->size;
  return acc;
}

// Number of keys strictly below k.
inline std::uint64_t rank_lt(const version* v, key_type k) {
  std::uint64_t acc = 0;
  while (!is_leaf(v)) {
    AUGTREE_CHECK_TAG(v, kTagVersion);
    if (k <= v->key) {
      v = v->left;
    } else {
      acc += v->left->size;
      v = v->right;
    }
  }
  AUGTREE_CHECK_TAG(v, kTagVersion);
  if (v->key < k) acc += v->size;
  return acc;
}

// i-th smallest key, 1-based.
inline key_type select(const version* v, std::uint64_t i) {
  if (i == 0 || i > v->size)
    throw std::out_of_range("select index outside snapshot size");
  while (!is_leaf(v)) {
    AUGTREE_CHECK_TAG(v, kTagVersion);
    std::uint64_t ls = v->left->size;
    if (i <= ls) {
      v = v->left;
    } else {
      i -= ls;
      v = v->right;
    }
  }
  AUGTREE_CHECK_TAG(v, kTagVersion);
  return v->key;
}

inline std::uint64_t range_count(const version* v, key_type lo, key_type hi) {
  if (lo > hi) return 0;
  return rank_le(v, hi) - rank_lt(v, lo);
}

}  // namespace vq

// A stable view of the set: one version-tree root plus an epoch pin that
// keeps every version reachable from it alive. Copyable (the copy pins the
// same epoch) and shareable across threads; queries on it never block and
// never observe later updates.
class snapshot {
 public:
  snapshot(epoch_domain& dom, const version* root, std::size_t pin)
      : dom_(&dom), root_(root), pin_(pin) {}

  snapshot(const snapshot& o)
      : dom_(o.dom_),
        root_(o.root_),
        pin_(o.dom_->acquire_pin_at(o.dom_->pin_epoch(o.pin_))) {}

  snapshot(snapshot&& o) noexcept
      : dom_(o.dom_), root_(o.root_), pin_(o.pin_) {
    o.dom_ = nullptr;
  }

  snapshot& operator=(const snapshot&) = delete;
  snapshot& operator=(snapshot&&) = delete;

  ~snapshot() {
    if (dom_) dom_->release_pin(pin_);
  }

  const version* root() const noexcept { return root_; }
  std::uint64_t size() const { return root_->size; }

  bool find(key_type k) const { return vq::find(root_, k); }
  std::uint64_t rank(key_type k) const { return vq::rank_le(root_, k); }
  key_type select(std::uint64_t i) const { return vq::select(root_, i); }
  std::uint64_t range_count(key_type lo, key_type hi) const {
    return vq::range_count(root_, lo, hi);
  }

 private:
  epoch_domain* dom_;
  const version* root_;
  std::size_t pin_;
};

}  // namespace augtree
