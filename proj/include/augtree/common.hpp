#pragma once

#include <atomic>
#include <cstdint>
#include <thread>

namespace augtree {

using key_type = std::uint64_t;

// Largest key value is reserved as the sentinel key; the public API rejects it.
inline constexpr key_type kSentinelKey = ~key_type{0};

inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#else
  std::this_thread::yield();
#endif
}

// Object tags let instrumented builds detect touches of reclaimed memory.
inline constexpr std::uint32_t kTagNode = 0x4e4f4445u;        // "NODE"
inline constexpr std::uint32_t kTagVersion = 0x56455253u;     // "VERS"
inline constexpr std::uint32_t kTagScx = 0x53435852u;         // "SCXR"
inline constexpr std::uint32_t kTagPropStatus = 0x50535453u;  // "PSTS"
inline constexpr std::uint32_t kTagPoisoned = 0xdeadbeefu;

namespace detail {
// Count of poison-tag check failures, process wide. Stays zero unless a
// reclaimed object is dereferenced by a guarded reader.
inline std::atomic<std::uint64_t> g_poison_hits{0};
}  // namespace detail

#if defined(AUGTREE_POISON_CHECKS)
#define AUGTREE_CHECK_TAG(obj, expected)                                     \
  do {                                                                       \
    if ((obj)->tag.load(std::memory_order_relaxed) != (expected))            \
      ::augtree::detail::g_poison_hits.fetch_add(1,                          \
                                                 std::memory_order_relaxed); \
  } while (0)
#else
#define AUGTREE_CHECK_TAG(obj, expected) ((void)0)
#endif

}  // namespace augtree
