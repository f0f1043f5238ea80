#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <vector>

#include "augtree/common.hpp"
#include "augtree/epoch.hpp"
#include "augtree/llx_scx.hpp"
#include "augtree/staging.hpp"
#include "augtree/stats.hpp"

// The immutable version tree hanging off the node tree. Every node carries a
// version pointer outside its llx/scx footprint; versions are write-once and
// replaced wholesale by CAS, so a reader holding any version sees a frozen,
// internally consistent subtree with exact subtree sizes.

namespace augtree {

// Subtree summary policy. Swapping this struct (keeping the same three
// members) re-targets the whole propagation machinery at a different
// aggregate; size is what the ordered-set query API consumes.
struct size_augmentation {
  using value_type = std::uint64_t;
  static value_type leaf_value(key_type key) noexcept {
    return key == kSentinelKey ? 0 : 1;
  }
  static value_type combine(value_type a, value_type b) noexcept {
    return a + b;
  }
};

using augmentation = size_augmentation;

// One record per propagation in the delegating modes. `refs` counts the
// owner's creation reference plus one reference per delegatee link currently
// published at this record; the record is retired when the count hits zero.
// Holding a link-reference until the publisher itself returns is what lets a
// waiter hop delegatee links safely: while it observes the publisher's done
// flag still false, the target's reference cannot have been released, so the
// target's retirement epoch lies inside the waiter's guard window.
struct prop_status {
  std::atomic<std::uint32_t> tag{kTagPropStatus};
  std::atomic<bool> done{false};
  std::atomic<prop_status*> delegatee{nullptr};
  std::atomic<std::uint32_t> refs{1};
};

inline void prop_status_deleter(epoch_domain& dom, void* p) {
  reclaim_object<prop_status>(dom, p);
}

// Drops one reference; the last one out retires the record. Must run under an
// epoch guard.
inline void prop_status_unref(epoch_domain& dom, prop_status* ps) {
  if (ps->refs.fetch_sub(1, std::memory_order_seq_cst) == 1)
    dom.retire(ps, &prop_status_deleter);
}

struct version {
  std::atomic<std::uint32_t> tag{kTagVersion};
  const key_type key;
  const augmentation::value_type size;
  version* const left;
  version* const right;
  prop_status* const status;  // installer's record; null for nil-fills and leaves

  version(key_type k, augmentation::value_type s, version* l, version* r,
          prop_status* st)
      : key(k), size(s), left(l), right(r), status(st) {}
};

// Leaves are born with their final version; internal nodes start nil and are
// filled on first contact.
inline version* make_leaf_version(key_type key) {
  return new version(key, augmentation::leaf_value(key), nullptr, nullptr,
                     nullptr);
}

inline void version_deleter(epoch_domain& dom, void* p) {
  reclaim_object<version>(dom, p);
}

// Retires the node's last version along with the node itself. Used as the
// deleter for every node handed to epoch_domain::retire.
inline void node_deleter(epoch_domain& dom, void* p) {
  auto* n = static_cast<node*>(p);
  if (version* v = n->ver.load(std::memory_order_relaxed))
    dom.retire(v, &version_deleter);
  reclaim_object<node>(dom, p);
}

// Per-propagation scratch state: displaced versions awaiting retirement plus
// the work counters folded into tree_stats when the propagation finishes.
struct propagate_ctx {
  tree_stats* stats;
  std::vector<version*> to_retire;
  std::uint64_t nodes = 0;
  std::uint64_t cas = 0;
  std::uint64_t nil_fills = 0;
};

struct refresh_result {
  bool success;
  prop_status* blocker;  // installer of the version that won, on failure
  version* vl;
  version* vr;
};

inline void refresh_nil(node* x, propagate_ctx& ctx);

inline version* read_version(node* x, propagate_ctx& ctx) {
  AUGTREE_CHECK_TAG(x, kTagNode);
  version* v = x->ver.load(std::memory_order_acquire);
  if (v == nullptr) {
    refresh_nil(x, ctx);
    v = x->ver.load(std::memory_order_acquire);
  }
  assert(v != nullptr);
  AUGTREE_CHECK_TAG(v, kTagVersion);
  return v;
}

// Child version read that is consistent with the link: the child pointer must
// be unchanged across obtaining its version, else re-read.
inline version* consistent_child_version(node* x, int dir,
                                         propagate_ctx& ctx) {
  node* c = x->child[dir].load(std::memory_order_acquire);
  version* v = read_version(c, ctx);
  while (x->child[dir].load(std::memory_order_acquire) != c) {
    c = x->child[dir].load(std::memory_order_acquire);
    v = read_version(c, ctx);
  }
  return v;
}

// The two refresh flavors must never trade roles: a nil fill installs only
// over an empty slot, a top-level refresh only over an existing version. The
// counters make that auditable; leaving expected updated on failure tells the
// caller what actually sat in the slot.
inline bool install_version(node* x, version*& expected, version* nv,
                            propagate_ctx& ctx, bool nil_site) {
  if (nil_site) {
    if (expected != nullptr)
      ctx.stats->nil_cas_nonnil_expected.fetch_add(
          1, std::memory_order_relaxed);
  } else if (expected == nullptr) {
    ctx.stats->top_cas_nil_expected.fetch_add(1, std::memory_order_relaxed);
  }
  if (nil_site) {
    AUGTREE_YIELD(ver_cas_nil_pre, x->key, false);
  } else {
    AUGTREE_YIELD(ver_cas_top_pre, x->key, false);
  }
  bool won = x->ver.compare_exchange_strong(expected, nv,
                                            std::memory_order_acq_rel,
                                            std::memory_order_acquire);
  if (nil_site) {
    AUGTREE_YIELD(ver_cas_nil_post, x->key, won);
  } else {
    AUGTREE_YIELD(ver_cas_top_post, x->key, won);
  }
  ctx.cas += 1;
  return won;
}

// Fills a nil version slot. Only ever installs over nil; losing the CAS means
// someone else filled it, which is just as good.
inline void refresh_nil(node* x, propagate_ctx& ctx) {
  if (x->ver.load(std::memory_order_acquire) != nullptr) return;
  version* vl = consistent_child_version(x, 0, ctx);
  version* vr = consistent_child_version(x, 1, ctx);
  auto* nv = new version(x->key, augmentation::combine(vl->size, vr->size),
                         vl, vr, nullptr);
  version* expected = nullptr;
  if (install_version(x, expected, nv, ctx, true))
    ctx.nil_fills += 1;
  else
    delete nv;  // never published
}

// Recomputes x's version from its children and swings the top pointer. On
// failure the caller learns whose propagation beat it via the blocker field.
inline refresh_result refresh_top(node* x, prop_status* ps,
                                  propagate_ctx& ctx) {
  version* old = x->ver.load(std::memory_order_acquire);
  if (old == nullptr) {
    refresh_nil(x, ctx);
    old = x->ver.load(std::memory_order_acquire);
  }
  version* vl = consistent_child_version(x, 0, ctx);
  version* vr = consistent_child_version(x, 1, ctx);
  auto* nv = new version(x->key, augmentation::combine(vl->size, vr->size),
                         vl, vr, ps);
  version* expected = old;
  if (install_version(x, expected, nv, ctx, false)) {
    ctx.to_retire.push_back(old);
    return {true, nullptr, vl, vr};
  }
  delete nv;
  AUGTREE_CHECK_TAG(expected, kTagVersion);
  return {false, expected->status, vl, vr};
}

}  // namespace augtree
