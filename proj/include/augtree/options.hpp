#pragma once

#include <cstddef>
#include <cstdint>

namespace augtree {

enum class propagate_mode { direct, delegated, eager_delegated };

inline constexpr std::uint32_t kDefaultWaitSpinLimit = 4096;

struct set_options {
  bool balanced = true;
  propagate_mode mode = propagate_mode::direct;
  // 0 blocks until the delegatee chain finishes; otherwise the number of
  // chain-polling iterations before a waiter gives up and resumes refreshing.
  std::uint32_t wait_spin_limit = kDefaultWaitSpinLimit;
  // Seed the propagation stack from the update's recorded search path
  // instead of re-descending from the root.
  bool seed_stack_from_update = true;
  std::size_t limbo_watermark = 4096;
  std::uint32_t advance_interval = 256;
};

}  // namespace augtree
