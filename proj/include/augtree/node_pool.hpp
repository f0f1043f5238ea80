#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <new>
#include <vector>

#if defined(__linux__)
#include <sys/mman.h>
#endif

// Fixed-size slab pool backing node allocation. Nodes are the unit the search
// loop chases, so their placement decides whether the hardware prefetcher can
// follow a descent: carving blocks from large slabs in allocation order gives
// consecutively created nodes a constant address stride, where the general
// heap interleaves them with unrelated allocations. Slabs are aligned so the
// kernel can back them with huge pages. Freed blocks are recycled ahead of
// fresh ones; slab memory itself stays mapped for the life of the process.

namespace augtree {
namespace detail {

class node_pool {
 public:
  static node_pool& instance() {
    // Leaked on purpose: frees can arrive from destructors that run after
    // static teardown has begun.
    static node_pool* p = new node_pool;
    return *p;
  }

  void* alloc(std::size_t bytes) {
    std::lock_guard<std::mutex> lk(mu_);
    if (!free_.empty()) {
      void* p = free_.back();
      free_.pop_back();
      return p;
    }
    if (left_ < bytes) new_slab();
    void* p = bump_;
    bump_ += bytes;
    left_ -= bytes;
    return p;
  }

  void dealloc(void* p) {
    std::lock_guard<std::mutex> lk(mu_);
    free_.push_back(p);
  }

 private:
  static constexpr std::size_t kSlabBytes = std::size_t{8} << 20;
  static constexpr std::size_t kHugePage = std::size_t{2} << 20;

  void new_slab() {
    char* raw = static_cast<char*>(::operator new(kSlabBytes + kHugePage));
    slabs_.push_back(raw);
    auto base = reinterpret_cast<std::uintptr_t>(raw) + kHugePage - 1;
    bump_ = reinterpret_cast<char*>(base & ~(kHugePage - 1));
    left_ = kSlabBytes;
#if defined(__linux__)
    madvise(bump_, kSlabBytes, MADV_HUGEPAGE);
#endif
  }

  std::mutex mu_;
  char* bump_ = nullptr;
  std::size_t left_ = 0;
  std::vector<void*> free_;
  std::vector<char*> slabs_;
};

}  // namespace detail
}  // namespace augtree
