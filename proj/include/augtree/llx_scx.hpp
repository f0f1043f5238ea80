#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>

#include "augtree/common.hpp"
#include "augtree/epoch.hpp"
#include "augtree/node_pool.hpp"
#include "augtree/staging.hpp"
#include "augtree/stats.hpp"

// Load-link-extended / store-conditional-extended over tree nodes, built from
// single-word CAS with cooperative helping. An scx freezes every record it
// read (pointing their info fields at its descriptor), marks the records it
// removes, swings exactly one child pointer, then commits. Any thread that
// runs into an in-progress descriptor helps it to a terminal state before
// failing, so a stalled thread cannot block others.

namespace augtree {

struct version;
struct scx_record;

struct node {
  std::atomic<std::uint32_t> tag{kTagNode};
  const key_type key;
  const std::uint32_t weight;
  std::atomic<node*> child[2];          // both null for leaves
  std::atomic<scx_record*> info;        // descriptor or terminal token
  std::atomic<bool> marked{false};      // set once, by the scx finalizing this node
  std::atomic<version*> ver;            // version link; CASed directly, never frozen

  node(key_type k, std::uint32_t w, node* l, node* r, version* v);

  static void* operator new(std::size_t n) {
    return detail::node_pool::instance().alloc(n);
  }
  static void operator delete(void* p) noexcept {
    detail::node_pool::instance().dealloc(p);
  }

  bool is_leaf() const noexcept {
    return child[0].load(std::memory_order_acquire) == nullptr;
  }
  node* load_child(int dir) const noexcept {
    return child[dir].load(std::memory_order_acquire);
  }
};

static_assert(sizeof(node) == 64, "node fills exactly one cache line");

// Terminal descriptors are encoded as tagged pointers so that a record whose
// last scx finished long ago never forces a dereference of that descriptor.
// Bit 0 set = terminal; the descriptor object itself may already be reclaimed.
inline scx_record* terminal_token(scx_record* d) noexcept {
  return reinterpret_cast<scx_record*>(reinterpret_cast<std::uintptr_t>(d) | 1u);
}
inline bool is_terminal(scx_record* p) noexcept {
  return (reinterpret_cast<std::uintptr_t>(p) & 1u) != 0;
}
inline scx_record* const kInitialInfo =
    reinterpret_cast<scx_record*>(std::uintptr_t{1});

struct scx_record {
  static constexpr int kMaxV = 6;
  enum state_t : int { in_progress = 0, committed = 1, aborted = 2 };

  std::atomic<std::uint32_t> tag{kTagScx};
  std::atomic<int> state{in_progress};
  std::atomic<bool> all_frozen{false};

  // Written by the owner before the descriptor is published; read-only after.
  int n = 0;
  node* v[kMaxV] = {};
  scx_record* infos[kMaxV] = {};
  bool finalize[kMaxV] = {};
  node* target = nullptr;
  int dir = 0;
  node* old_child = nullptr;
  node* new_child = nullptr;
};

inline node::node(key_type k, std::uint32_t w, node* l, node* r, version* v)
    : key(k), weight(w), info(kInitialInfo), ver(v) {
  child[0].store(l, std::memory_order_relaxed);
  child[1].store(r, std::memory_order_relaxed);
}

enum class llx_status { ok, fail, finalized };

struct llx_snapshot {
  node* n = nullptr;
  scx_record* info_token = nullptr;  // expected info value for a later scx
  node* left = nullptr;
  node* right = nullptr;
};

struct llx_result {
  llx_status status;
  llx_snapshot snap;
};

// Drives a published descriptor to a terminal state. Returns true iff it
// committed. Safe to call from any thread that holds a guard.
inline bool scx_help(scx_record* d) {
  AUGTREE_CHECK_TAG(d, kTagScx);
  // Freeze phase: claim every record in V for this descriptor, in order.
  for (int i = 0; i < d->n; ++i) {
    node* r = d->v[i];
    scx_record* expected = d->infos[i];
    if (!r->info.compare_exchange_strong(expected, d,
                                         std::memory_order_acq_rel,
                                         std::memory_order_acquire)) {
      if (expected != d) {
        // Beaten by a different descriptor. If the freeze phase already
        // finished, this scx committed and the conflicting descriptor came
        // later; otherwise the scx loses.
        if (d->all_frozen.load(std::memory_order_acquire)) return true;
        d->state.store(scx_record::aborted, std::memory_order_release);
        return false;
      }
      // Another helper froze r for d; keep going.
    }
  }
  d->all_frozen.store(true, std::memory_order_release);
  for (int i = 0; i < d->n; ++i)
    if (d->finalize[i])
      d->v[i]->marked.store(true, std::memory_order_release);
  node* expected_child = d->old_child;
  d->target->child[d->dir].compare_exchange_strong(
      expected_child, d->new_child, std::memory_order_acq_rel,
      std::memory_order_relaxed);
  d->state.store(scx_record::committed, std::memory_order_release);
  return true;
}

// Snapshot of a record's mutable fields. Fail is returned only after this
// call observed a conflicting scx (an in-progress descriptor, which it helped
// finish first, or an info change mid-read).
inline llx_result llx(node* r, tree_stats& stats) {
  AUGTREE_CHECK_TAG(r, kTagNode);
  scx_record* token = r->info.load(std::memory_order_acquire);
  bool frozen = false;
  if (!is_terminal(token))
    frozen = token->state.load(std::memory_order_acquire) ==
             scx_record::in_progress;
  if (!frozen && !r->marked.load(std::memory_order_acquire)) {
    node* l = r->child[0].load(std::memory_order_acquire);
    node* rr = r->child[1].load(std::memory_order_acquire);
    if (r->info.load(std::memory_order_acquire) == token)
      return {llx_status::ok, {r, token, l, rr}};
    stats.llx_fail.fetch_add(1, std::memory_order_relaxed);
    return {llx_status::fail, {}};
  }
  if (frozen) scx_help(token);
  if (r->marked.load(std::memory_order_acquire))
    return {llx_status::finalized, {}};
  stats.llx_fail.fetch_add(1, std::memory_order_relaxed);
  return {llx_status::fail, {}};
}

struct scx_args {
  const llx_snapshot* v;  // records to freeze, with their observed infos
  int n;
  bool finalize[scx_record::kMaxV];  // which of them this scx removes
  int target_index;                  // index into v of the record whose child changes
  int dir;
  node* new_child;
};

// Attempts the multi-record update described by args. True means the child
// pointer was swung and every finalize-marked record is now permanently out
// of the tree; false means no visible change is attributable to this call.
inline bool scx(epoch_domain& dom, tree_stats& stats, const scx_args& args) {
  assert(args.n <= scx_record::kMaxV);
  auto* d = new scx_record();
  d->n = args.n;
  for (int i = 0; i < args.n; ++i) {
    d->v[i] = args.v[i].n;
    d->infos[i] = args.v[i].info_token;
    d->finalize[i] = args.finalize[i];
  }
  const llx_snapshot& t = args.v[args.target_index];
  d->target = t.n;
  d->dir = args.dir;
  d->old_child = args.dir == 0 ? t.left : t.right;
  d->new_child = args.new_child;

  [[maybe_unused]] const key_type target_key = d->target->key;
  AUGTREE_YIELD(scx_pre, target_key, false);
  bool ok = scx_help(d);

  // Replace this descriptor with its terminal token wherever it is still
  // installed, so no later llx needs to dereference it, then retire it.
  scx_record* tok = terminal_token(d);
  for (int i = 0; i < args.n; ++i) {
    scx_record* expected = d;
    d->v[i]->info.compare_exchange_strong(expected, tok,
                                          std::memory_order_acq_rel,
                                          std::memory_order_relaxed);
  }
  dom.retire(d, [](epoch_domain& ed, void* p) {
    auto* rec = static_cast<scx_record*>(p);
#if defined(AUGTREE_POISON_CHECKS)
    rec->tag.store(kTagPoisoned, std::memory_order_relaxed);
    ed.count_reclaimed();
    ed.quarantine(p, [](void* q) { delete static_cast<scx_record*>(q); });
#else
    ed.count_reclaimed();
    delete rec;
#endif
  });

  if (ok)
    stats.scx_committed.fetch_add(1, std::memory_order_relaxed);
  else
    stats.scx_aborted.fetch_add(1, std::memory_order_relaxed);
  AUGTREE_YIELD(scx_post, target_key, ok);
  return ok;
}

}  // namespace augtree
