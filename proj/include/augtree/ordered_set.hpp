#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "augtree/chromatic_tree.hpp"
#include "augtree/common.hpp"
#include "augtree/epoch.hpp"
#include "augtree/options.hpp"
#include "augtree/propagate.hpp"
#include "augtree/snapshot.hpp"
#include "augtree/stats.hpp"
#include "augtree/version.hpp"

namespace augtree {

// Concurrent ordered set of 64-bit keys. Updates are lock-free; queries run
// against an immutable version of the whole set, so find, rank, select and
// range_count cost one root read plus a height-bounded descent regardless of
// concurrent writers, and snapshot() hands out a stable view in O(1).
//
// The key ~0 is reserved internally and rejected.
class ordered_set {
 public:
  explicit ordered_set(set_options opt = {})
      : opt_(opt),
        dom_(opt.limbo_watermark, opt.advance_interval),
        tree_(dom_, stats_, opt_) {}

  bool insert(key_type k) {
    reject_reserved(k);
    epoch_domain::guard g(dom_);
    std::vector<node*>& path = path_buffer();
    bool added = tree_.insert(k, path);
    if (added && opt_.balanced) tree_.cleanup(k);
    propagate(tree_, k, path);
    return added;
  }

  bool erase(key_type k) {
    reject_reserved(k);
    epoch_domain::guard g(dom_);
    std::vector<node*>& path = path_buffer();
    bool removed = tree_.erase(k, path);
    if (removed && opt_.balanced) tree_.cleanup(k);
    // Unsuccessful updates propagate too: a failed erase may have found the
    // key already structurally deleted but not yet reflected at the root, and
    // the caller's false must not be observable before that deletion is.
    propagate(tree_, k, path);
    return removed;
  }

  bool find(key_type k) {
    epoch_domain::guard g(dom_);
    return vq::find(current_root_version(), k);
  }

  // Number of keys <= k.
  std::uint64_t rank(key_type k) {
    epoch_domain::guard g(dom_);
    return vq::rank_le(current_root_version(), k);
  }

  // i-th smallest key, 1-based; throws std::out_of_range past the size.
  key_type select(std::uint64_t i) {
    epoch_domain::guard g(dom_);
    return vq::select(current_root_version(), i);
  }

  // Number of keys in [lo, hi]; zero when lo > hi.
  std::uint64_t range_count(key_type lo, key_type hi) {
    epoch_domain::guard g(dom_);
    return vq::range_count(current_root_version(), lo, hi);
  }

  std::uint64_t size() {
    epoch_domain::guard g(dom_);
    return current_root_version()->size;
  }

  // O(1) stable view; remains queryable and consistent for as long as the
  // handle lives, regardless of concurrent updates.
  augtree::snapshot snapshot() {
    std::size_t pin = dom_.acquire_pin();
    const version* v = current_root_version();
    return augtree::snapshot(dom_, v, pin);
  }

  const tree_stats& stats() const noexcept { return stats_; }
  epoch_domain& domain() noexcept { return dom_; }
  chromatic_tree& tree() noexcept { return tree_; }
  const set_options& options() const noexcept { return opt_; }

 private:
  static void reject_reserved(key_type k) {
    if (k == kSentinelKey)
      throw std::invalid_argument("key value reserved for internal use");
  }

  static std::vector<node*>& path_buffer() {
    static thread_local std::vector<node*> path;
    path.clear();
    return path;
  }

  // Caller must hold a guard or a pin.
  version* current_root_version() {
    propagate_ctx ctx;
    ctx.stats = &stats_;
    version* v = read_version(tree_.root(), ctx);
    if (ctx.cas != 0)
      stats_.propagate_cas.fetch_add(ctx.cas, std::memory_order_relaxed);
    if (ctx.nil_fills != 0)
      stats_.nil_fills.fetch_add(ctx.nil_fills, std::memory_order_relaxed);
    return v;
  }

  set_options opt_;
  tree_stats stats_;
  epoch_domain dom_;  // must outlive tree_
  chromatic_tree tree_;
};

}  // namespace augtree
