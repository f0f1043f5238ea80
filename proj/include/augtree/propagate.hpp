#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <thread>
#include <vector>

#include "augtree/chromatic_tree.hpp"
#include "augtree/common.hpp"
#include "augtree/epoch.hpp"
#include "augtree/options.hpp"
#include "augtree/staging.hpp"
#include "augtree/stats.hpp"
#include "augtree/version.hpp"

// Drives an update's effect through the version tree, bottom-up along the
// key's search path, in one of three flavors: plain double-refresh, refresh
// with delegation after a double failure, or refresh with eager delegation
// after any single failure.

namespace augtree {

enum class wait_result { completed, timed_out };

// Takes a chain-link reference. Fails when the count already hit zero, which
// means the record's owner returned and the record is retired; reviving it
// would let the count hit zero twice, so the caller must treat failure as an
// already-finished delegatee instead.
inline bool prop_status_try_ref(prop_status* ps) {
  std::uint32_t c = ps->refs.load(std::memory_order_seq_cst);
  while (c != 0) {
    if (ps->refs.compare_exchange_weak(c, c + 1, std::memory_order_seq_cst))
      return true;
  }
  return false;
}

// Spins until some record along the delegatee chain reports done, hopping
// toward the head of the chain as links appear. With a nonzero spin limit the
// wait instead gives up after that many polling iterations.
//
// Hopping from d to d's delegatee is safe without taking a reference: d's
// owner released its link reference either after setting done (normal return)
// or after clearing the link (timeout). Reading the link and then re-reading
// done == false therefore proves the target's release, and so its retirement,
// comes later than a point inside this thread's guard window, and the epochs
// cannot advance far enough to free it while the guard is held.
inline wait_result wait_for_delegatee(tree_stats& stats, prop_status* d,
                                      std::uint32_t spin_limit) {
  std::uint32_t iters = 0;
  for (;;) {
    AUGTREE_CHECK_TAG(d, kTagPropStatus);
    if (d->done.load(std::memory_order_seq_cst)) return wait_result::completed;
    if (prop_status* nxt = d->delegatee.load(std::memory_order_seq_cst)) {
      if (d->done.load(std::memory_order_seq_cst))
        return wait_result::completed;
      d = nxt;
    } else {
      AUGTREE_YIELD(wait_spin, 0, false);
      cpu_relax();
      std::this_thread::yield();
    }
    if (spin_limit != 0 && ++iters >= spin_limit) {
      stats.wait_timeouts.fetch_add(1, std::memory_order_relaxed);
      return wait_result::timed_out;
    }
  }
}

// Refreshes every node on the path from k up to the root so the root version
// reflects the update. Must run under an epoch guard. update_path carries the
// internal nodes visited by the structural operation, root first; it seeds
// the work stack unless configured otherwise or empty, in which case the path
// is re-searched.
//
// A delegating propagation may instead finish early: when its own refresh of
// a node keeps losing, it parks itself behind the propagation that beat it
// and returns once any head of that chain completes, because the winning
// refresh already folded this update's subtree into the versions above.
inline void propagate(chromatic_tree& tree, key_type k,
                      const std::vector<node*>& update_path) {
  const set_options& opt = tree.options();
  epoch_domain& dom = tree.domain();
  tree_stats& stats = tree.stats();

  propagate_ctx ctx;
  ctx.stats = &stats;

  prop_status* ps = opt.mode == propagate_mode::direct ? nullptr
                                                       : new prop_status();

  std::vector<node*> st;
  if (opt.seed_stack_from_update && !update_path.empty())
    st = update_path;
  else
    tree.search(k, &st);

  std::vector<node*> refreshed;
  auto is_refreshed = [&refreshed](node* n) {
    for (node* r : refreshed)
      if (r == n) return true;
    return false;
  };

  bool delegated_exit = false;
  while (!st.empty() && !delegated_exit) {
    // Re-descend toward k from the deepest stack node. Rotations may have
    // replaced nodes that were on the recorded path; the current children of
    // the deepest not-yet-refreshed ancestor are what must be refreshed next.
    for (;;) {
      node* cur = st.back();
      assert(!cur->is_leaf());
      node* c = cur->load_child(k < cur->key ? 0 : 1);
      if (c->is_leaf() || is_refreshed(c)) break;
      st.push_back(c);
    }
    node* top = st.back();
    st.pop_back();
    ctx.nodes += 1;

    if (opt.mode == propagate_mode::direct) {
      refresh_result r = refresh_top(top, ps, ctx);
      if (!r.success) refresh_top(top, ps, ctx);
      // A second refresh needs no retry: whoever made it fail started after
      // the first failure, so it read children that already include this
      // update's subtree.
      refreshed.push_back(top);
      continue;
    }

    if (opt.mode == propagate_mode::delegated) {
      refresh_result r = refresh_top(top, ps, ctx);
      if (!r.success) r = refresh_top(top, ps, ctx);
      if (r.success) {
        refreshed.push_back(top);
        continue;
      }
      if (top->marked.load(std::memory_order_acquire)) {
        // The node was finalized by a rotation; its replacement is reached
        // through the live ancestors still on the stack.
        refreshed.push_back(top);
        continue;
      }
      assert(r.blocker != nullptr);
      stats.delegations.fetch_add(1, std::memory_order_relaxed);
      if (!prop_status_try_ref(r.blocker)) {
        // Blocker already finished; same outcome as an immediate done.
        delegated_exit = true;
        break;
      }
      AUGTREE_YIELD(delegatee_write, top->key, false);
      ps->delegatee.store(r.blocker, std::memory_order_seq_cst);
      if (wait_for_delegatee(stats, r.blocker, opt.wait_spin_limit) ==
          wait_result::completed) {
        delegated_exit = true;
        break;
      }
      // Timed out: retract the link before touching anything else so the
      // chain stays acyclic, then resume refreshing this same node.
      ps->delegatee.store(nullptr, std::memory_order_seq_cst);
      prop_status_unref(dom, r.blocker);
      st.push_back(top);
      continue;
    }

    // Eager delegation: retry the node until a refresh both succeeds and ran
    // against child versions that are still current; any failure at a live
    // node delegates immediately.
    for (;;) {
      refresh_result r = refresh_top(top, ps, ctx);
      if (r.success) {
        node* c0 = top->load_child(0);
        node* c1 = top->load_child(1);
        version* v0 = c0->ver.load(std::memory_order_acquire);
        version* v1 = c1->ver.load(std::memory_order_acquire);
        if (v0 == r.vl && v1 == r.vr) {
          refreshed.push_back(top);
          break;
        }
        continue;
      }
      if (top->marked.load(std::memory_order_acquire)) {
        refreshed.push_back(top);
        break;
      }
      assert(r.blocker != nullptr);
      stats.delegations.fetch_add(1, std::memory_order_relaxed);
      if (!prop_status_try_ref(r.blocker)) {
        delegated_exit = true;
        break;
      }
      AUGTREE_YIELD(delegatee_write, top->key, false);
      ps->delegatee.store(r.blocker, std::memory_order_seq_cst);
      if (wait_for_delegatee(stats, r.blocker, opt.wait_spin_limit) ==
          wait_result::completed) {
        delegated_exit = true;
        break;
      }
      ps->delegatee.store(nullptr, std::memory_order_seq_cst);
      prop_status_unref(dom, r.blocker);
    }
  }

  stats.add_propagate(ctx.nodes, ctx.cas, ctx.nil_fills);
  for (version* v : ctx.to_retire) dom.retire(v, &version_deleter);
  if (ps) {
    AUGTREE_YIELD(done_write, k, false);
    ps->done.store(true, std::memory_order_seq_cst);
    // Bookkeeping after the done flag: a waiter that saw done still false is
    // thereby guaranteed the link reference below was not yet released.
    if (prop_status* t = ps->delegatee.load(std::memory_order_relaxed))
      prop_status_unref(dom, t);
    prop_status_unref(dom, ps);
  }
}

}  // namespace augtree
