#pragma once

#include <atomic>
#include <cstdint>

namespace augtree {

// Per-tree operation counters. Increments are relaxed; totals are only read
// at quiescent points (end of trial / end of test phase).
struct tree_stats {
  std::atomic<std::uint64_t> scx_committed{0};
  std::atomic<std::uint64_t> scx_aborted{0};
  std::atomic<std::uint64_t> llx_fail{0};
  std::atomic<std::uint64_t> rebalance_steps{0};

  std::atomic<std::uint64_t> propagates{0};
  std::atomic<std::uint64_t> propagate_nodes{0};    // nodes visited by Propagate loops
  std::atomic<std::uint64_t> propagate_cas{0};      // version CAS attempts
  std::atomic<std::uint64_t> nil_fills{0};          // successful nil -> version installs
  std::atomic<std::uint64_t> delegations{0};
  std::atomic<std::uint64_t> wait_timeouts{0};

  // CAS discipline audit: both must stay zero.
  std::atomic<std::uint64_t> top_cas_nil_expected{0};
  std::atomic<std::uint64_t> nil_cas_nonnil_expected{0};

  void add_propagate(std::uint64_t nodes, std::uint64_t cas,
                     std::uint64_t fills) noexcept {
    propagates.fetch_add(1, std::memory_order_relaxed);
    propagate_nodes.fetch_add(nodes, std::memory_order_relaxed);
    propagate_cas.fetch_add(cas, std::memory_order_relaxed);
    if (fills != 0) nil_fills.fetch_add(fills, std::memory_order_relaxed);
  }

  double avg_nodes_per_propagate() const noexcept {
    auto p = propagates.load(std::memory_order_relaxed);
    return p ? double(propagate_nodes.load(std::memory_order_relaxed)) / double(p) : 0.0;
  }
  double avg_cas_per_propagate() const noexcept {
    auto p = propagates.load(std::memory_order_relaxed);
    return p ? double(propagate_cas.load(std::memory_order_relaxed)) / double(p) : 0.0;
  }
  double avg_nil_fills_per_propagate() const noexcept {
    auto p = propagates.load(std::memory_order_relaxed);
    return p ? double(nil_fills.load(std::memory_order_relaxed)) / double(p) : 0.0;
  }
};

}  // namespace augtree
