#pragma once

#include <cstdint>

#include "augtree/common.hpp"

// Deterministic-interleaving hooks. Test builds define AUGTREE_STAGING and
// install a scheduler; release builds compile the hook sites away entirely.

namespace augtree {

enum class yield_point : std::uint8_t {
  ver_cas_top_pre,   // top-level refresh, before the version CAS
  ver_cas_top_post,  // after it (aux = success)
  ver_cas_nil_pre,   // recursive nil-filling refresh, before the CAS
  ver_cas_nil_post,  // after it (aux = success)
  scx_pre,           // owner about to run the freezing/commit sequence
  scx_post,          // owner's scx finished (aux = committed)
  delegatee_write,   // delegatee link about to be published
  done_write,        // done flag about to be set
  wait_spin,         // one iteration of wait_for_delegatee
};

#if defined(AUGTREE_STAGING)

class staged_scheduler;

namespace detail {
inline staged_scheduler* g_scheduler = nullptr;
inline thread_local int g_staged_thread = -1;
}  // namespace detail

// Implemented in the test harness; blocks until the schedule lets the
// calling staged thread pass this point.
void staged_yield(yield_point p, key_type key, bool aux);

inline void yield_hook(yield_point p, key_type key, bool aux = false) {
  if (detail::g_scheduler != nullptr && detail::g_staged_thread >= 0)
    staged_yield(p, key, aux);
}

#define AUGTREE_YIELD(point, key, aux) \
  ::augtree::yield_hook(::augtree::yield_point::point, (key), (aux))

#else

#define AUGTREE_YIELD(point, key, aux) ((void)0)

#endif

}  // namespace augtree
